#pragma once

#include "blockinfer/common.hpp"

#include <vector>

namespace blockinfer {

/// min ||beta||_1  subject to  ||q - A beta||_inf <= lambda.
struct LinfFeasibleL1Problem {
    Matrix A;
    Vector q;
    double lambda = 0.0;
    double feas_tol = 1e-7;
    double opt_tol = 1e-6;
    int max_iter = 100000;
};

struct LpOptions {
    double feas_tol = 1e-7;
    double opt_tol = 1e-6;
    int max_iter = 100000;
};

struct LpSolution {
    Vector beta;
    /// Optimal dual vector u: maximizes q'u - lambda ||u||_1 s.t. ||A'u||_inf <= 1.
    Vector dual;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
    /// ||q - A beta||_inf
    double max_residual = 0.0;
    int iterations = 0;
};

/// Rows row0 .. row0 + L.rows() of A equal L * R. When A stacks such
/// low-rank slabs the residual q - A beta is cheaper through the factors.
struct LowRankRows {
    Index row0 = 0;
    Matrix L;
    Matrix R;
};

/// Bounded-variable primal simplex applied to the dual program
///
///     max  q'u - lambda ||u||_1   s.t.  -1 <= (A'u)_l <= 1,
///
/// whose simplex multipliers are the primal beta. Only the cost vector depends
/// on lambda, so the basis of one solve is a feasible start for the next: a
/// descending lambda grid costs a handful of pivots per point. The inverse of
/// the k x k active system (k = number of basic dual rows) is updated in
/// O(k^2) per pivot and refactored periodically.
class L1LinfPathSolver {
public:
    /// Keeps references to A and q; both must outlive the solver.
    L1LinfPathSolver(const Matrix& A, const Vector& q, LpOptions options = {});
    /// Same, with A also given slab by slab (must cover every row in order).
    L1LinfPathSolver(const Matrix& A, const Vector& q, LpOptions options, std::vector<LowRankRows> factors);

    /// Throws Infeasible (attained radius NaN; see min_radius()) when no beta
    /// satisfies the constraint, NumericalFailure on breakdown.
    LpSolution solve(double lambda);

    /// Smallest lambda for which the constraint set is nonempty.
    double min_radius(double rel_tol = 1e-10);

    /// Forget the warm-start basis.
    void reset();

private:
    bool iterate(double lambda, int& iterations, double& ray_bound);
    void refactor();
    void refresh(double lambda);
    void replace_row(std::size_t i, Index m, int sign);
    void replace_coord(std::size_t c, Index l, int bound);
    void append(Index m, int sign, Index l, int bound);
    void remove(std::size_t i, std::size_t c);
    void reindex();
    LpSolution certify(double lambda, int iterations) const;

    const Matrix& A_;
    const Vector& q_;
    Matrix At_;
    LpOptions opt_;
    Index M_, p_;

    // Basis: rows_ (basic dual rows, sign +1/-1), coords_ (coordinates whose
    // slack sits at a bound, value +1/-1). rows_.size() == coords_.size().
    std::vector<Index> rows_;
    std::vector<int> row_sign_;
    std::vector<Index> coords_;
    std::vector<int> coord_bound_;
    std::vector<int> row_pos_;    // M: position in rows_ or -1
    std::vector<int> coord_pos_;  // p: position in coords_ or -1

    // Derived quantities, valid after refresh().
    Matrix inv_;                  // inverse of A(rows_, coords_); rows follow coords_
    int updates_ = 0;
    Vector x_;                    // basic row magnitudes (>= 0)
    Vector w_;                    // A'u for every coordinate
    Vector y_;                    // multipliers (= beta) on coords_, zero elsewhere
    Vector resid_;                // q - A y
    std::vector<LowRankRows> factors_;
    Index factor_rank_ = 0;       // sum of slab ranks
    Index factor_size_ = 0;       // sum of L sizes
    int stall_ = 0;
    bool bland_ = false;
};

/// One-shot solve. Throws Infeasible carrying the attained minimum
/// min_beta ||q - A beta||_inf.
LpSolution solve_l1_linf(const LinfFeasibleL1Problem& problem);

}  // namespace blockinfer
