#pragma once

#include "blockinfer/common.hpp"

#include <vector>

namespace blockinfer {

/// Symmetric PSD block-diagonal matrix. A block may carry a factor F with
/// block = F F' (F has fewer columns than rows when the block is rank deficient).
struct BlockDiagonal {
    std::vector<Index> offsets;
    std::vector<Matrix> blocks;
    std::vector<Matrix> factors;  // empty matrix when absent

    Index size() const;
    std::size_t count() const { return blocks.size(); }
    void push(Matrix block, Matrix factor = Matrix());
    Vector multiply(const Vector& v) const;
    Matrix dense() const;
};

/// min v'Wv  subject to  ||Gmat' v - target||_inf <= lambda_prime.
struct LinfConstrainedQP {
    Matrix W;
    Matrix Gmat;
    Vector target;
    double lambda_prime = 0.0;
    double feas_tol = 1e-7;
    double opt_tol = 1e-6;
};

struct QpOptions {
    double feas_tol = 1e-7;
    double opt_tol = 1e-6;
    int max_sweeps = 100000;
    /// Relative tolerance for range(G_b) inside range(W_b).
    double range_tol = 1e-8;
    int admm_max_iter = 50000;
};

struct QpSolution {
    Vector v;
    /// Multipliers with 2Wv = Gmat mu; mu_l > 0 where (G'v - t)_l = -lambda',
    /// mu_l < 0 where it equals +lambda'.
    Vector mu;
    double objective = 0.0;
    double constraint_norm = 0.0;  // ||G'v - t||_inf
    double kkt_residual = 0.0;     // max of stationarity and complementarity residuals
    int iterations = 0;
    bool used_admm = false;
};

/// Solves the QP for many targets sharing (W, G). When range(G_b) lies in
/// range(W_b) for every block the problem is solved through its dual in
/// p dimensions:  min_mu  mu' Sigma mu / 4 - t'mu + lambda' ||mu||_1,
/// Sigma = G' W^+ G, by coordinate descent with an active-set Newton finish.
/// Otherwise an ADMM splitting on the primal is used.
class LinfQpSolver {
public:
    /// Keeps a reference to G; it must outlive the solver.
    LinfQpSolver(BlockDiagonal W, const Matrix& G, QpOptions options = {});

    /// Throws Infeasible (with the smallest attainable radius) when no v meets
    /// the constraint, NumericalFailure on non-convergence.
    QpSolution solve(const Vector& target, double lambda_prime) const;

    Index dimension() const { return p_; }
    bool range_condition() const { return range_ok_; }
    const Matrix& sigma() const { return sigma_; }

private:
    void check_feasible(const Vector& target, double lambda_prime) const;
    QpSolution solve_dual(const Vector& target, double lambda_prime) const;
    QpSolution solve_admm(const Vector& target, double lambda_prime) const;
    void finish(QpSolution& s, const Vector& target, double lambda_prime) const;

    BlockDiagonal W_;
    const Matrix& G_;
    QpOptions opt_;
    Index p_ = 0;
    bool range_ok_ = true;
    Matrix sigma_;                 // G' W^+ G (dual path)
    std::vector<Matrix> ctilde_;   // per block: Omega^{-1/2} U' G_b
    std::vector<Matrix> recover_;  // per block: U Omega^{-1/2}
    Matrix range_basis_;           // orthonormal basis of range(G'); empty if full rank
    // ADMM path: K = 2W + sigma I handled by Woodbury with G.
    std::vector<Matrix> kinv_;
    Matrix kinv_g_;
    Eigen::LLT<Matrix> schur_;
};

/// One-shot solve with a dense W.
QpSolution solve_qp_linf(const LinfConstrainedQP& problem);

}  // namespace blockinfer
