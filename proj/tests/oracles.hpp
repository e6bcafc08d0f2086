#pragma once

// Independent reference implementations used by the unit tests. Kept
// deliberately naive: loops, brute force, plain iterative methods.

#include "blockinfer/common.hpp"
#include "blockinfer/core_data.hpp"
#include "blockinfer/estimating.hpp"
#include "blockinfer/imputation.hpp"
#include "blockinfer/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using blockinfer::Index;
using blockinfer::Matrix;
using blockinfer::Vector;
using blockinfer::IndexSet;

inline Matrix random_matrix(blockinfer::Rng& rng, Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

inline Vector random_vector(blockinfer::Rng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline double soft(double x, double t) { return x > t ? x - t : (x < -t ? x + t : 0.0); }

// Calls f on every k-subset of {0..n-1}.
inline void subsets(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (k > n) return;
    while (true) {
        f(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

// min ||b||_1 s.t. |q - A b| <= lam by enumerating vertices of the
// arrangement {a_m' b = q_m +- lam} u {b_j = 0}. Returns +inf if infeasible.
inline double l1_linf_bruteforce(const Matrix& A, const Vector& q, double lam, Vector* arg = nullptr) {
    const Index M = A.rows(), p = A.cols();
    Matrix H(2 * M + p, p);
    Vector h(2 * M + p);
    for (Index m = 0; m < M; ++m) {
        H.row(2 * m) = A.row(m);
        h(2 * m) = q(m) + lam;
        H.row(2 * m + 1) = A.row(m);
        h(2 * m + 1) = q(m) - lam;
    }
    for (Index j = 0; j < p; ++j) {
        H.row(2 * M + j).setZero();
        H(2 * M + j, j) = 1.0;
        h(2 * M + j) = 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    subsets(static_cast<int>(2 * M + p), static_cast<int>(p), [&](const std::vector<int>& s) {
        Matrix S(p, p);
        Vector t(p);
        for (Index a = 0; a < p; ++a) {
            S.row(a) = H.row(s[static_cast<std::size_t>(a)]);
            t(a) = h(s[static_cast<std::size_t>(a)]);
        }
        Eigen::FullPivLU<Matrix> lu(S);
        if (lu.rank() < p) return;
        const Vector b = lu.solve(t);
        if (((q - A * b).cwiseAbs().array() > lam + 1e-9).any()) return;
        const double v = b.lpNorm<1>();
        if (v < best) {
            best = v;
            if (arg) *arg = b;
        }
    });
    return best;
}

// min v'Wv s.t. |G'v - t| <= lam for positive definite W, through the dual
//   max_mu  -mu'(G'W^{-1}G)mu/4 + t'mu - lam ||mu||_1
// solved by plain proximal gradient; v = W^{-1} G mu / 2.
inline Vector qp_dual_ista(const Matrix& W, const Matrix& G, const Vector& t, double lam, int iters = 200000) {
    const Matrix Winv = W.inverse();
    const Matrix S = G.transpose() * Winv * G;
    const double L = 0.5 * Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().maxCoeff();
    Vector mu = Vector::Zero(t.size());
    for (int it = 0; it < iters; ++it) {
        const Vector grad = 0.5 * S * mu - t;
        Vector next = mu - grad / L;
        for (Index l = 0; l < next.size(); ++l) next(l) = soft(next(l), lam / L);
        if ((next - mu).lpNorm<Eigen::Infinity>() < 1e-15) {
            mu = next;
            break;
        }
        mu = next;
    }
    return 0.5 * Winv * G * mu;
}

// Lasso subgradient optimality residual for mean((t - Xg)^2) + tau ||g||_1.
inline double lasso_kkt(const Matrix& X, const Vector& t, const Vector& g, double tau) {
    const double m = static_cast<double>(X.rows());
    const Vector grad = -2.0 / m * X.transpose() * (t - X * g);
    double worst = 0.0;
    for (Index j = 0; j < g.size(); ++j) {
        const double r = g(j) != 0.0 ? std::abs(grad(j) + tau * (g(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(grad(j)) - tau);
        worst = std::max(worst, r);
    }
    return worst;
}

// Blockwise-missing toy data: sources of the given sizes; group 0 complete,
// group r >= 1 misses source missing[r]. Returns the dataset with rows in group order.
inline blockinfer::SemiSupervisedDataset toy_dataset(blockinfer::Rng& rng, const std::vector<Index>& src,
                                                     const std::vector<int>& missing,
                                                     const std::vector<Index>& sizes,
                                                     const std::vector<Index>& supervised) {
    Index p = 0;
    std::vector<Index> off;
    for (Index s : src) {
        off.push_back(p);
        p += s;
    }
    Index n = 0;
    for (Index s : sizes) n += s;
    blockinfer::SemiSupervisedDataset d;
    d.X = random_matrix(rng, n, p);
    d.missing = blockinfer::MaskMatrix::Constant(n, p, false);
    d.y.resize(n);
    d.y_observed.assign(static_cast<std::size_t>(n), false);
    Vector beta = Vector::Zero(p);
    for (Index j = 0; j < p; j += 2) beta(j) = 0.5 + 0.1 * static_cast<double>(j);
    Index row = 0;
    for (std::size_t r = 0; r < sizes.size(); ++r) {
        for (Index a = 0; a < sizes[r]; ++a, ++row) {
            d.y(row) = d.X.row(row).dot(beta) + rng.normal();
            d.y_observed[static_cast<std::size_t>(row)] = a < supervised[r];
            if (!d.y_observed[static_cast<std::size_t>(row)]) d.y(row) = blockinfer::kNaN;
            if (missing[r] >= 0) {
                const auto s = static_cast<std::size_t>(missing[r]);
                d.missing.row(row).segment(off[s], src[s]).setConstant(true);
                d.X.row(row).segment(off[s], src[s]).setConstant(blockinfer::kNaN);
            }
            d.sample_ids.push_back(std::to_string(row + 1));
        }
    }
    for (Index j = 0; j < p; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
    return d;
}
struct Toy {
    blockinfer::SemiSupervisedDataset data;
    blockinfer::GroupStructure groups;
    blockinfer::ImputationModel model;
    blockinfer::ImputedViews views;
};

inline Toy make_toy(std::uint64_t seed, int R) {
    blockinfer::Rng rng(seed);
    const std::vector<Index> src = {2 + static_cast<Index>(rng.below(2)), 2, 1 + static_cast<Index>(rng.below(2))};
    std::vector<int> miss = {-1, 2, 1};
    miss.resize(static_cast<std::size_t>(R));
    std::vector<Index> sizes, sup;
    for (int r = 0; r < R; ++r) {
        sizes.push_back(12 + static_cast<Index>(rng.below(10)));
        sup.push_back(4 + static_cast<Index>(rng.below(5)));
    }
    Toy t;
    t.data = toy_dataset(rng, src, miss, sizes, sup);
    t.groups = blockinfer::derive_groups(t.data);
    t.model = blockinfer::fit_imputation(t.data, t.groups, blockinfer::TauPolicy{}, t.data.all_samples());
    t.views = blockinfer::materialize_views(t.model, t.data, t.groups);
    return t;
}

// Estimating-system pieces accumulated one sample at a time.
struct LoopSystem {
    Vector qf, qp;
    Matrix Bf, Bp, Gn, Wn;

    double max_error(const blockinfer::EstimatingSystem& s) const {
        double e = 0.0;
        e = std::max(e, (qf - s.q_full).lpNorm<Eigen::Infinity>());
        e = std::max(e, (Bf - s.B_full).lpNorm<Eigen::Infinity>());
        e = std::max(e, (qp - s.q_partial).lpNorm<Eigen::Infinity>());
        e = std::max(e, (Bp - s.B_partial).lpNorm<Eigen::Infinity>());
        e = std::max(e, (Gn - s.Gn).lpNorm<Eigen::Infinity>());
        e = std::max(e, (Wn - s.Wn.dense()).lpNorm<Eigen::Infinity>());
        return e;
    }
};

inline LoopSystem loop_system(const Toy& t, const blockinfer::SampleSet& D2, const blockinfer::SampleSet& D,
                              const blockinfer::SampleSet& Wpool) {
    const blockinfer::SemiSupervisedDataset& d = t.data;
    const blockinfer::GroupStructure& g = t.groups;
    const Index p = d.n_covariates();
    Index Mf = 0, Mp = 0;
    for (int r = 0; r < g.n_groups(); ++r)
        for (int k : g.sources[static_cast<std::size_t>(r)]) {
            Mf += static_cast<Index>(g.observed[static_cast<std::size_t>(k)].size());
            Mp += static_cast<Index>(g.J(r, k).size());
        }
    const double n = static_cast<double>(D2.size());
    const double nD = static_cast<double>(D.size());
    const double nW = static_cast<double>(Wpool.size());
    LoopSystem o;
    Vector& qf = o.qf;
    Vector& qp = o.qp;
    Matrix& Bf = o.Bf;
    Matrix& Bp = o.Bp;
    Matrix& Gn = o.Gn;
    Matrix& Wn = o.Wn;
    qf = Vector::Zero(Mf);
    qp = Vector::Zero(Mp);
    Bf = Matrix::Zero(Mf, p);
    Bp = Matrix::Zero(Mp, p);
    Gn = Matrix::Zero(Mp, p);
    Wn = Matrix::Zero(Mp, Mp);

    Index of = 0, op = 0;
    for (int r = 0; r < g.n_groups(); ++r) {
        double theta = 0.0, thetaD = 0.0, thetaW = 0.0;
        for (Index i : D2) theta += g.group_of[static_cast<std::size_t>(i)] == r;
        for (Index i : D) thetaD += g.group_of[static_cast<std::size_t>(i)] == r;
        for (Index i : Wpool) thetaW += g.group_of[static_cast<std::size_t>(i)] == r;
        const double nWr = thetaW;
        theta /= n;
        thetaD /= nD;
        for (int k : g.sources[static_cast<std::size_t>(r)]) {
            const IndexSet& a = g.observed[static_cast<std::size_t>(k)];
            const IndexSet& J = g.J(r, k);
            for (Index i : D2) {
                if (g.group_of[static_cast<std::size_t>(i)] != r) continue;
                const Vector xh = blockinfer::imputed_view(t.model, d, g, i, k);
                for (std::size_t u = 0; u < a.size(); ++u) {
                    qf(of + static_cast<Index>(u)) += d.y(i) * xh(a[u]) / (n * theta);
                    for (Index j = 0; j < p; ++j) Bf(of + static_cast<Index>(u), j) += xh(a[u]) * xh(j) / (n * theta);
                }
                for (std::size_t u = 0; u < J.size(); ++u) {
                    qp(op + static_cast<Index>(u)) += d.y(i) * d.X(i, J[u]) / (n * theta);
                    for (Index j = 0; j < p; ++j)
                        Bp(op + static_cast<Index>(u), j) += d.X(i, J[u]) * xh(j) / (n * theta);
                }
            }
            for (Index i : D) {
                if (g.group_of[static_cast<std::size_t>(i)] != r) continue;
                const Vector xh = blockinfer::imputed_view(t.model, d, g, i, k);
                for (std::size_t u = 0; u < J.size(); ++u)
                    for (Index j = 0; j < p; ++j)
                        Gn(op + static_cast<Index>(u), j) += d.X(i, J[u]) * xh(j) / (nD * thetaD);
            }
            for (Index i : Wpool) {
                if (g.group_of[static_cast<std::size_t>(i)] != r) continue;
                for (std::size_t u = 0; u < J.size(); ++u)
                    for (std::size_t w = 0; w < J.size(); ++w)
                        Wn(op + static_cast<Index>(u), op + static_cast<Index>(w)) +=
                            nW * d.X(i, J[u]) * d.X(i, J[w]) / (nWr * nWr);
            }
            of += static_cast<Index>(a.size());
            op += static_cast<Index>(J.size());
        }
    }
    return o;
}

}  // namespace oracle
