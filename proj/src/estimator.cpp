#include "blockinfer/estimator.hpp"

#include "blockinfer/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace blockinfer {

namespace {

FitResult from_solution(const EstimatingSystem& s, double lambda, const LpSolution& sol) {
    FitResult f;
    f.beta_hat = sol.beta;
    f.lambda = lambda;
    f.feasibility_slack = eval_g(s, sol.beta, Variant::Full).cwiseAbs().maxCoeff();
    f.duality_gap = sol.duality_gap;
    f.lp_iterations = sol.iterations;
    return f;
}

}  // namespace

FitResult fit_dantzig(const EstimatingSystem& system, double lambda, const LpOptions& lp) {
    L1LinfPathSolver solver(system.B_full, system.q_full, lp, system.full_factors);
    try {
        return from_solution(system, lambda, solver.solve(lambda));
    } catch (const Infeasible& e) {
        const double attained = solver.min_radius();
        std::ostringstream os;
        os << e.what() << " (smallest attainable radius " << attained << ")";
        throw Infeasible(os.str(), attained);
    }
}

std::vector<FitResult> fit_dantzig_path(const EstimatingSystem& system, const std::vector<double>& lambdas,
                                        const LpOptions& lp) {
    std::vector<std::size_t> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
    std::vector<FitResult> out(lambdas.size());
    L1LinfPathSolver solver(system.B_full, system.q_full, lp, system.full_factors);
    for (std::size_t t : order) {
        try {
            out[t] = from_solution(system, lambdas[t], solver.solve(lambdas[t]));
        } catch (const Infeasible&) {
            // Smaller radii are infeasible too.
            for (std::size_t u : order)
                if (lambdas[u] <= lambdas[t]) out[u].lambda = lambdas[u];
            break;
        } catch (const NumericalFailure&) {
            // Near the smallest radius the basis can degrade; skip the point.
            out[t].lambda = lambdas[t];
            solver.reset();
        }
    }
    return out;
}

std::vector<double> default_lambda_grid(Index n, Index N, Index p, int points, double lo, double hi) {
    const double lp = std::log(static_cast<double>(p));
    const double base = std::sqrt(lp / static_cast<double>(n)) + std::sqrt(lp / static_cast<double>(n + N));
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int t = 0; t < points; ++t) {
        const double frac = points == 1 ? 0.0 : static_cast<double>(t) / (points - 1);
        grid[static_cast<std::size_t>(t)] = base * hi * std::pow(lo / hi, frac);
    }
    return grid;
}

double view_loss(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                 Index i, const Vector& beta) {
    const int r = groups.group_of[static_cast<std::size_t>(i)];
    const std::size_t K = groups.sources[static_cast<std::size_t>(r)].size();
    double acc = 0.0;
    for (std::size_t t = 0; t < K; ++t) {
        const double e = data.y(i) - views.row(groups, i, t).dot(beta);
        acc += e * e;
    }
    return acc / static_cast<double>(K);
}

double predict_sample(const GroupStructure& groups, const ImputedViews& views, Index i, const Vector& beta) {
    const int r = groups.group_of[static_cast<std::size_t>(i)];
    const std::size_t K = groups.sources[static_cast<std::size_t>(r)].size();
    double acc = 0.0;
    for (std::size_t t = 0; t < K; ++t) acc += views.row(groups, i, t).dot(beta);
    return acc / static_cast<double>(K);
}

std::vector<int> make_folds(const GroupStructure& groups, const SampleSet& pool, int folds, std::uint64_t seed,
                            bool& stratified) {
    if (folds < 2) throw DegenerateFolds("cross-validation needs at least 2 folds");
    if (static_cast<Index>(pool.size()) < folds) throw DegenerateFolds("fewer supervised samples than folds");
    const int R = groups.n_groups();

    auto covers = [&](const std::vector<int>& label) {
        for (int f = 0; f < folds; ++f) {
            std::vector<bool> seen(static_cast<std::size_t>(R), false);
            bool nonempty = false;
            for (std::size_t a = 0; a < pool.size(); ++a) {
                if (label[a] == f) nonempty = true;
                else seen[static_cast<std::size_t>(groups.group_of[static_cast<std::size_t>(pool[a])])] = true;
            }
            if (!nonempty || std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
        }
        return true;
    };

    Rng rng(seed);
    std::vector<int> label(pool.size(), 0);
    // Stratified: deal each group's shuffled members round-robin, continuing
    // the fold counter across groups so fold sizes stay balanced.
    std::vector<std::vector<std::size_t>> by_group(static_cast<std::size_t>(R));
    for (std::size_t a = 0; a < pool.size(); ++a)
        by_group[static_cast<std::size_t>(groups.group_of[static_cast<std::size_t>(pool[a])])].push_back(a);
    int next = 0;
    for (auto& members : by_group) {
        rng.shuffle(members);
        for (std::size_t a : members) label[a] = next++ % folds;
    }
    if (covers(label)) {
        stratified = true;
        return label;
    }
    std::vector<std::size_t> perm(pool.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (std::size_t t = 0; t < perm.size(); ++t) label[perm[t]] = static_cast<int>(t % static_cast<std::size_t>(folds));
    if (covers(label)) {
        stratified = false;
        return label;
    }
    throw DegenerateFolds("every fold assignment leaves some group without training samples");
}

FitResult cv_fit(const SemiSupervisedDataset& data, const GroupStructure& groups, const ImputedViews& views,
                 const SampleSet& pool, const CvOptions& opt) {
    std::vector<double> grid = opt.grid;
    if (grid.empty()) {
        const Index n = static_cast<Index>(pool.size());
        grid = default_lambda_grid(n, data.n_samples() - n, groups.p, opt.grid_points);
    }
    bool stratified = false;
    const std::vector<int> label = make_folds(groups, pool, opt.folds, opt.seed, stratified);

    const SystemOptions fit_only{false, false, WnPool::Projection};
    std::vector<SampleSet> train_sets, test_sets;
    for (int f = 0; f < opt.folds; ++f) {
        SampleSet train, test;
        for (std::size_t a = 0; a < pool.size(); ++a) (label[a] == f ? test : train).push_back(pool[a]);
        train_sets.push_back(std::move(train));
        test_sets.push_back(std::move(test));
    }
    const EstimatingSystem full = build_system(data, groups, views, pool, {}, fit_only);

    std::vector<double> loss;
    std::vector<bool> feasible;
    auto evaluate = [&] {
        loss.assign(grid.size(), 0.0);
        feasible.assign(grid.size(), true);
        for (int f = 0; f < opt.folds; ++f) {
            const EstimatingSystem sys = build_system(data, groups, views, train_sets[static_cast<std::size_t>(f)], {}, fit_only);
            const auto path = fit_dantzig_path(sys, grid, opt.lp);
            const SampleSet& test = test_sets[static_cast<std::size_t>(f)];
            for (std::size_t t = 0; t < grid.size(); ++t) {
                if (!feasible[t]) continue;
                if (path[t].beta_hat.size() == 0) {
                    feasible[t] = false;
                    continue;
                }
                double acc = 0.0;
                for (Index i : test) acc += view_loss(data, groups, views, i, path[t].beta_hat);
                loss[t] += acc / static_cast<double>(test.size());
            }
        }
    };
    evaluate();

    bool shifted = false;
    if (opt.grid.empty() && std::none_of(feasible.begin(), feasible.end(), [](bool b) { return b; })) {
        // Low-dimensional data: rebuild the grid with the same span above the
        // largest minimal radius over folds and the full pool.
        double r = L1LinfPathSolver(full.B_full, full.q_full, opt.lp, full.full_factors).min_radius();
        for (const SampleSet& train : train_sets) {
            const EstimatingSystem s = build_system(data, groups, views, train, {}, fit_only);
            r = std::max(r, L1LinfPathSolver(s.B_full, s.q_full, opt.lp, s.full_factors).min_radius());
        }
        const double lo = 1.01 * r, ratio = 40.0;
        const int m = static_cast<int>(grid.size());
        for (int t = 0; t < m; ++t)
            grid[static_cast<std::size_t>(t)] = lo * std::pow(ratio, m > 1 ? static_cast<double>(m - 1 - t) / (m - 1) : 0.0);
        shifted = true;
        evaluate();
    }

    FitResult best_fit;
    std::size_t best = grid.size();
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (!feasible[t]) continue;
        loss[t] /= opt.folds;
        if (best == grid.size() || loss[t] < loss[best] || (loss[t] == loss[best] && grid[t] > grid[best])) best = t;
    }
    if (best == grid.size()) throw Infeasible("cross-validation: every lambda on the grid is infeasible for some fold");

    best_fit = fit_dantzig(full, grid[best], opt.lp);
    for (std::size_t t = 0; t < grid.size(); ++t)
        best_fit.cv_table.push_back({grid[t], feasible[t] ? loss[t] : std::numeric_limits<double>::infinity(), feasible[t]});
    best_fit.cv_folds = opt.folds;
    best_fit.cv_stratified = stratified;
    best_fit.cv_grid_shifted = shifted;
    return best_fit;
}

}  // namespace blockinfer
