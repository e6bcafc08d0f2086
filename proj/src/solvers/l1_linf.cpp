#include "blockinfer/solvers/l1_linf.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace blockinfer {

namespace {
constexpr double kPriceTol = 1e-10;
constexpr double kPivotTol = 1e-11;
constexpr double kHarrisTol = 1e-11;
constexpr int kStallLimit = 50;
constexpr int kRefactorEvery = 64;
}  // namespace

L1LinfPathSolver::L1LinfPathSolver(const Matrix& A, const Vector& q, LpOptions options)
    : A_(A), q_(q), At_(A.transpose()), opt_(options), M_(A.rows()), p_(A.cols()) {
    if (q.size() != M_) throw std::invalid_argument("L1LinfPathSolver: q length differs from A rows");
    reset();
}

L1LinfPathSolver::L1LinfPathSolver(const Matrix& A, const Vector& q, LpOptions options,
                                   std::vector<LowRankRows> factors)
    : L1LinfPathSolver(A, q, options) {
    Index next = 0;
    for (const LowRankRows& f : factors) {
        if (f.row0 != next || f.L.cols() != f.R.rows() || f.R.cols() != p_)
            throw std::invalid_argument("L1LinfPathSolver: factors do not tile the rows of A");
        next += f.L.rows();
        factor_rank_ += f.L.cols();
        factor_size_ += f.L.size();
    }
    if (next != M_) throw std::invalid_argument("L1LinfPathSolver: factors do not tile the rows of A");
    factors_ = std::move(factors);
}

void L1LinfPathSolver::reset() {
    rows_.clear();
    row_sign_.clear();
    coords_.clear();
    coord_bound_.clear();
    row_pos_.assign(static_cast<std::size_t>(M_), -1);
    coord_pos_.assign(static_cast<std::size_t>(p_), -1);
    inv_.resize(0, 0);
    updates_ = 0;
    stall_ = 0;
    bland_ = false;
}

void L1LinfPathSolver::reindex() {
    std::fill(row_pos_.begin(), row_pos_.end(), -1);
    std::fill(coord_pos_.begin(), coord_pos_.end(), -1);
    for (std::size_t i = 0; i < rows_.size(); ++i) row_pos_[static_cast<std::size_t>(rows_[i])] = static_cast<int>(i);
    for (std::size_t c = 0; c < coords_.size(); ++c)
        coord_pos_[static_cast<std::size_t>(coords_[c])] = static_cast<int>(c);
}

void L1LinfPathSolver::refactor() {
    const Index k = static_cast<Index>(rows_.size());
    updates_ = 0;
    if (k == 0) {
        inv_.resize(0, 0);
        return;
    }
    const Matrix E = A_(rows_, coords_);
    Eigen::PartialPivLU<Matrix> lu(E);
    if (!(lu.rcond() > 1e-14)) throw NumericalFailure("L1LinfPathSolver: singular basis");
    inv_ = lu.inverse();
}

// E(i, :) <- A(m, coords_)
void L1LinfPathSolver::replace_row(std::size_t i, Index m, int sign) {
    const Index ii = static_cast<Index>(i);
    const Vector a = At_(coords_, m);
    const Vector h = inv_.transpose() * a;
    const double piv = h(ii);
    rows_[i] = m;
    row_sign_[i] = sign;
    if (std::abs(piv) < 1e-12 || ++updates_ > kRefactorEvery) return refactor();
    Vector hd = h;
    hd(ii) -= 1.0;
    const Vector u = inv_.col(ii);
    inv_.noalias() -= (u / piv) * hd.transpose();
}

// E(:, c) <- A(rows_, l)
void L1LinfPathSolver::replace_coord(std::size_t c, Index l, int bound) {
    const Index cc = static_cast<Index>(c);
    const Vector b = A_(rows_, l);
    const Vector g = inv_ * b;
    const double piv = g(cc);
    coords_[c] = l;
    coord_bound_[c] = bound;
    if (std::abs(piv) < 1e-12 || ++updates_ > kRefactorEvery) return refactor();
    Vector gd = g;
    gd(cc) -= 1.0;
    const Vector r = inv_.row(cc).transpose();
    inv_.noalias() -= (gd / piv) * r.transpose();
}

// Border E with row A(m, coords_ + l) and column A(rows_ + m, l).
void L1LinfPathSolver::append(Index m, int sign, Index l, int bound) {
    const Index k = static_cast<Index>(rows_.size());
    const Vector a = At_(coords_, m);
    const Vector b = A_(rows_, l);
    const double alpha = A_(m, l);
    rows_.push_back(m);
    row_sign_.push_back(sign);
    coords_.push_back(l);
    coord_bound_.push_back(bound);
    if (k == 0) {
        if (alpha == 0.0) throw NumericalFailure("L1LinfPathSolver: singular basis");
        inv_.setConstant(1, 1, 1.0 / alpha);
        return;
    }
    const Vector f = inv_ * b;
    const Vector h = inv_.transpose() * a;
    const double s = alpha - a.dot(f);
    if (std::abs(s) < 1e-12 || ++updates_ > kRefactorEvery) return refactor();
    Matrix next(k + 1, k + 1);
    next.topLeftCorner(k, k) = inv_ + (f / s) * h.transpose();
    next.topRightCorner(k, 1) = -f / s;
    next.bottomLeftCorner(1, k) = -h.transpose() / s;
    next(k, k) = 1.0 / s;
    inv_.swap(next);
}

// Drop basic row i and coordinate c.
void L1LinfPathSolver::remove(std::size_t i, std::size_t c) {
    const Index k = static_cast<Index>(rows_.size());
    const Index ii = static_cast<Index>(i), cc = static_cast<Index>(c);
    const double piv = inv_(cc, ii);
    rows_.erase(rows_.begin() + static_cast<long>(i));
    row_sign_.erase(row_sign_.begin() + static_cast<long>(i));
    coords_.erase(coords_.begin() + static_cast<long>(c));
    coord_bound_.erase(coord_bound_.begin() + static_cast<long>(c));
    if (std::abs(piv) < 1e-12 || ++updates_ > kRefactorEvery) return refactor();
    std::vector<Index> keep_r, keep_c;
    for (Index t = 0; t < k; ++t) {
        if (t != cc) keep_r.push_back(t);
        if (t != ii) keep_c.push_back(t);
    }
    const Vector colv = inv_(keep_r, ii);
    const Vector rowv = inv_(cc, keep_c).transpose();
    Matrix next = inv_(keep_r, keep_c);
    next.noalias() -= (colv / piv) * rowv.transpose();
    inv_.swap(next);
}

void L1LinfPathSolver::refresh(double lambda) {
    const Index k = static_cast<Index>(rows_.size());
    y_ = Vector::Zero(p_);
    resid_ = q_;
    w_ = Vector::Zero(p_);
    x_.resize(k);
    if (k == 0) return;

    Vector bound(k), rhs(k);
    for (Index c = 0; c < k; ++c) bound(c) = coord_bound_[static_cast<std::size_t>(c)];
    for (Index i = 0; i < k; ++i)
        rhs(i) = q_(rows_[static_cast<std::size_t>(i)]) - row_sign_[static_cast<std::size_t>(i)] * lambda;
    const Vector z = inv_.transpose() * bound;
    const Vector ya = inv_ * rhs;
    for (Index i = 0; i < k; ++i) {
        x_(i) = row_sign_[static_cast<std::size_t>(i)] * z(i);
        w_.noalias() += z(i) * At_.col(rows_[static_cast<std::size_t>(i)]);
    }
    for (Index c = 0; c < k; ++c) y_(coords_[static_cast<std::size_t>(c)]) = ya(c);
    if (!factors_.empty() && factor_rank_ * k + factor_size_ < M_ * k) {
        for (const LowRankRows& f : factors_) {
            Vector t = Vector::Zero(f.R.rows());
            for (Index c = 0; c < k; ++c) t.noalias() += ya(c) * f.R.col(coords_[static_cast<std::size_t>(c)]);
            resid_.segment(f.row0, f.L.rows()).noalias() -= f.L * t;
        }
    } else {
        for (Index c = 0; c < k; ++c) resid_.noalias() -= ya(c) * A_.col(coords_[static_cast<std::size_t>(c)]);
    }
}

// One simplex pivot. Returns false when optimal; throws Infeasible on an
// unbounded dual ray.
bool L1LinfPathSolver::iterate(double lambda, int& iterations, double& ray_bound) {
    refresh(lambda);

    // Pricing.
    enum class Kind { None, RowPlus, RowMinus, Coord };
    Kind kind = Kind::None;
    Index which = -1;
    double best = 0.0;
    for (Index m = 0; m < M_; ++m) {
        if (row_pos_[static_cast<std::size_t>(m)] >= 0) continue;
        const double dp = resid_(m) - lambda;
        const double dm = -resid_(m) - lambda;
        if (dp > kPriceTol && (bland_ ? kind == Kind::None : dp > best)) {
            kind = Kind::RowPlus, which = m, best = dp;
            if (bland_) break;
        }
        if (dm > kPriceTol && (bland_ ? kind == Kind::None : dm > best)) {
            kind = Kind::RowMinus, which = m, best = dm;
            if (bland_) break;
        }
    }
    if (!(bland_ && kind != Kind::None)) {
        for (std::size_t c = 0; c < coords_.size(); ++c) {
            const double d = y_(coords_[c]);
            const double gain = coord_bound_[c] > 0 ? -d : d;
            if (gain > kPriceTol && (bland_ ? kind == Kind::None : gain > best)) {
                kind = Kind::Coord, which = static_cast<Index>(c), best = gain;
                if (bland_) break;
            }
        }
    }
    if (kind == Kind::None) return false;

    // Change of the basic variables per unit step.
    const Index k = static_cast<Index>(rows_.size());
    Vector dz = Vector::Zero(k);
    Vector dw = Vector::Zero(p_);
    int enter_sign = 0;
    if (kind == Kind::Coord) {
        const int delta = -coord_bound_[static_cast<std::size_t>(which)];
        dz = delta * inv_.row(which).transpose();
    } else {
        enter_sign = kind == Kind::RowPlus ? 1 : -1;
        dw = enter_sign * At_.col(which);
        if (k > 0) dz = -enter_sign * (inv_.transpose() * At_(coords_, which));
    }
    for (Index i = 0; i < k; ++i) dw.noalias() += dz(i) * At_.col(rows_[static_cast<std::size_t>(i)]);

    // Harris ratio test over basic rows (x >= 0) and basic slacks (|w| <= 1).
    struct Cand {
        bool is_row;
        Index idx;  // position in rows_, or coordinate
        double ratio;
        double pivot;
        int bound;  // slack bound reached
    };
    std::vector<Cand> cands;
    double theta_max = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < k; ++i) {
        const double dx = row_sign_[static_cast<std::size_t>(i)] * dz(i);
        if (dx < -kPivotTol) {
            const double slack = std::max(0.0, x_(i));
            theta_max = std::min(theta_max, (slack + kHarrisTol) / -dx);
            cands.push_back({true, i, slack / -dx, -dx, 0});
        }
    }
    for (Index l = 0; l < p_; ++l) {
        if (coord_pos_[static_cast<std::size_t>(l)] >= 0) continue;
        const double d = dw(l);
        if (d > kPivotTol) {
            const double slack = std::max(0.0, 1.0 - w_(l));
            theta_max = std::min(theta_max, (slack + kHarrisTol) / d);
            cands.push_back({false, l, slack / d, d, 1});
        } else if (d < -kPivotTol) {
            const double slack = std::max(0.0, 1.0 + w_(l));
            theta_max = std::min(theta_max, (slack + kHarrisTol) / -d);
            cands.push_back({false, l, slack / -d, -d, -1});
        }
    }

    const bool flip_possible = kind == Kind::Coord;
    if (cands.empty() && !flip_possible) {
        // Unbounded dual ray: the primal constraint set is empty.
        Vector ray = Vector::Zero(M_);
        ray(which) = enter_sign;
        for (Index i = 0; i < k; ++i) ray(rows_[static_cast<std::size_t>(i)]) += dz(i);
        const double l1 = ray.lpNorm<1>();
        ray_bound = l1 > 0.0 ? q_.dot(ray) / l1 : kNaN;
        std::ostringstream os;
        os << "no beta satisfies ||q - A beta||_inf <= " << lambda;
        throw Infeasible(os.str());
    }

    const Cand* leave = nullptr;
    for (const Cand& c : cands) {
        if (c.ratio > theta_max) continue;
        if (!leave) {
            leave = &c;
        } else if (bland_) {
            const Index a = c.is_row ? rows_[static_cast<std::size_t>(c.idx)] : M_ + c.idx;
            const Index b = leave->is_row ? rows_[static_cast<std::size_t>(leave->idx)] : M_ + leave->idx;
            if (a < b) leave = &c;
        } else if (c.pivot > leave->pivot) {
            leave = &c;
        }
    }

    double theta = leave ? leave->ratio : std::numeric_limits<double>::infinity();
    if (flip_possible && (!leave || 2.0 <= theta)) {
        coord_bound_[static_cast<std::size_t>(which)] *= -1;
        theta = 2.0;
    } else if (kind == Kind::Coord) {
        const std::size_t c = static_cast<std::size_t>(which);
        if (leave->is_row)
            remove(static_cast<std::size_t>(leave->idx), c);
        else
            replace_coord(c, leave->idx, leave->bound);
        reindex();
    } else {
        if (leave->is_row)
            replace_row(static_cast<std::size_t>(leave->idx), which, enter_sign);
        else
            append(which, enter_sign, leave->idx, leave->bound);
        reindex();
    }

    if (theta * best <= 1e-14) {
        if (++stall_ > kStallLimit) bland_ = true;
    } else {
        stall_ = 0;
        bland_ = false;
    }
    ++iterations;
    return true;
}

LpSolution L1LinfPathSolver::certify(double lambda, int iterations) const {
    LpSolution s;
    s.beta = y_;
    s.dual = Vector::Zero(M_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        s.dual(rows_[i]) = row_sign_[i] * x_(static_cast<Index>(i));
    s.primal_objective = s.beta.lpNorm<1>();
    s.dual_objective = q_.dot(s.dual) - lambda * s.dual.lpNorm<1>();
    s.duality_gap = s.primal_objective - s.dual_objective;
    s.max_residual = resid_.size() ? resid_.cwiseAbs().maxCoeff() : 0.0;
    s.iterations = iterations;
    return s;
}

LpSolution L1LinfPathSolver::solve(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("L1LinfPathSolver: lambda must be nonnegative");
    for (int attempt = 0; attempt < 2; ++attempt) {
        int iterations = 0;
        double ray = kNaN;
        try {
            refactor();
            while (iterate(lambda, iterations, ray)) {
                if (iterations >= opt_.max_iter) throw NumericalFailure("L1LinfPathSolver: iteration limit");
            }
            // Re-derive the final point from a fresh factorization.
            refactor();
            refresh(lambda);
        } catch (const NumericalFailure&) {
            if (attempt == 1) throw;
            reset();
            continue;
        }
        LpSolution s = certify(lambda, iterations);
        const double dual_feas = M_ ? (At_ * s.dual).cwiseAbs().maxCoeff() : 0.0;
        const bool ok = s.max_residual <= lambda + opt_.feas_tol && dual_feas <= 1.0 + opt_.feas_tol &&
                        std::abs(s.duality_gap) <= opt_.opt_tol;
        if (ok) return s;
        if (attempt == 1) {
            std::ostringstream os;
            os << "L1LinfPathSolver: certificate failed (residual " << s.max_residual << ", gap "
               << s.duality_gap << ")";
            throw NumericalFailure(os.str());
        }
        reset();
    }
    throw NumericalFailure("L1LinfPathSolver: unreachable");
}

double L1LinfPathSolver::min_radius(double rel_tol) {
    double hi = q_.size() ? q_.cwiseAbs().maxCoeff() : 0.0;
    double lo = 0.0;
    auto feasible = [&](double lambda) {
        try {
            solve(lambda);
            return true;
        } catch (const Infeasible&) {
            return false;
        }
    };
    if (hi == 0.0 || feasible(0.0)) return 0.0;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

LpSolution solve_l1_linf(const LinfFeasibleL1Problem& pr) {
    if (pr.lambda < 0.0 || pr.q.size() != pr.A.rows())
        throw std::invalid_argument("solve_l1_linf: invalid problem");
    L1LinfPathSolver solver(pr.A, pr.q, {pr.feas_tol, pr.opt_tol, pr.max_iter});
    try {
        return solver.solve(pr.lambda);
    } catch (const Infeasible& e) {
        const double attained = solver.min_radius();
        std::ostringstream os;
        os << e.what() << " (smallest attainable radius " << attained << ")";
        throw Infeasible(os.str(), attained);
    }
}

}  // namespace blockinfer
