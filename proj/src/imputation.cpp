#include "blockinfer/imputation.hpp"

#include "blockinfer/solvers/lasso.hpp"

#include <algorithm>
#include <sstream>

namespace blockinfer {

std::string TauPolicy::describe() const {
    std::ostringstream os;
    switch (mode) {
        case TauMode::FixedRate: os << "fixed-rate c=" << c << " * sqrt(log|J| / m)"; break;
        case TauMode::Fixed: os << "fixed tau=" << value; break;
        case TauMode::CrossValidated: os << folds << "-fold cv over " << grid_points << " log-spaced values"; break;
    }
    return os.str();
}

Vector ImputationModel::gamma(const GroupStructure& groups, int r, int k, Index j) const {
    const Matrix& C = coef.at({r, k});
    const IndexSet& m = groups.missing[static_cast<std::size_t>(r)];
    auto it = std::lower_bound(m.begin(), m.end(), j);
    if (it == m.end() || *it != j) throw std::out_of_range("gamma: covariate is observed in this group");
    return C.col(it - m.begin());
}

std::size_t ImputationModel::n_regressions() const {
    std::size_t n = 0;
    for (const auto& [key, C] : coef) n += static_cast<std::size_t>(C.cols());
    return n;
}

ImputationModel fit_imputation(const SemiSupervisedDataset& data, const GroupStructure& groups,
                               const TauPolicy& policy, const SampleSet& fit_pool) {
    ImputationModel model;
    model.fit_pool = fit_pool;
    model.policy = policy;
    const int R = groups.n_groups();
    for (int r = 0; r < R; ++r) {
        const IndexSet& miss = groups.missing[static_cast<std::size_t>(r)];
        if (miss.empty()) continue;
        for (int k : groups.sources[static_cast<std::size_t>(r)]) {
            const IndexSet& J = groups.J(r, k);
            const SampleSet rows = pool_members(groups, fit_pool, k);
            const Index m = static_cast<Index>(rows.size());
            if (m < 2) {
                std::ostringstream os;
                os << "imputation source group " << k << " has " << m << " samples in the fit pool (need 2)";
                throw InsufficientSamples(os.str());
            }
            const Matrix design = data.X(rows, J);
            const Matrix targets = data.X(rows, miss);
            const double inv = 1.0 / static_cast<double>(m);
            Matrix gram;
            if (policy.mode != TauMode::CrossValidated) gram = (design.transpose() * design) * inv;

            Matrix C(static_cast<Index>(J.size()), static_cast<Index>(miss.size()));
            std::vector<double> taus(miss.size());
            std::vector<bool> conv(miss.size());
            for (std::size_t c = 0; c < miss.size(); ++c) {
                const Vector target = targets.col(static_cast<Index>(c));
                if (policy.mode == TauMode::CrossValidated) {
                    const int folds = static_cast<int>(std::min<Index>(policy.folds, m));
                    const auto grid = default_tau_grid(design, target, policy.grid_points);
                    LassoCvResult cv = lasso_cv(design, target, folds, grid);
                    C.col(static_cast<Index>(c)) = cv.coefficients;
                    taus[c] = cv.tau_star;
                    conv[c] = true;
                    continue;
                }
                const double tau = policy.mode == TauMode::Fixed
                                       ? policy.value
                                       : policy.c * std::sqrt(std::log(static_cast<double>(J.size())) * inv);
                const Vector corr = (design.transpose() * target) * inv;
                const LassoResult fit = lasso_cd_gram(gram, corr, target.squaredNorm() * inv, tau);
                C.col(static_cast<Index>(c)) = fit.coefficients;
                taus[c] = tau;
                conv[c] = fit.converged;
            }
            model.coef.emplace(std::make_pair(r, k), std::move(C));
            model.tau.emplace(std::make_pair(r, k), std::move(taus));
            model.converged.emplace(std::make_pair(r, k), std::move(conv));
        }
    }
    return model;
}

Matrix imputed_rows(const ImputationModel& model, const SemiSupervisedDataset& data,
                    const GroupStructure& groups, int r, const SampleSet& rows, int k) {
    const IndexSet& obs = groups.observed[static_cast<std::size_t>(r)];
    const IndexSet& miss = groups.missing[static_cast<std::size_t>(r)];
    Matrix out(static_cast<Index>(rows.size()), groups.p);
    out(Eigen::all, obs) = data.X(rows, obs);
    if (!miss.empty()) {
        const Matrix& C = model.coef.at({r, k});
        out(Eigen::all, miss) = data.X(rows, groups.J(r, k)) * C;
    }
    return out;
}

Vector imputed_view(const ImputationModel& model, const SemiSupervisedDataset& data,
                    const GroupStructure& groups, Index i, int k) {
    const int r = groups.group_of[static_cast<std::size_t>(i)];
    const auto& src = groups.sources[static_cast<std::size_t>(r)];
    if (std::find(src.begin(), src.end(), k) == src.end())
        throw std::invalid_argument("imputed_view: k is not an imputation source of the sample's group");
    return imputed_rows(model, data, groups, r, {i}, k).row(0).transpose();
}

ImputedViews materialize_views(const ImputationModel& model, const SemiSupervisedDataset& data,
                               const GroupStructure& groups) {
    ImputedViews v;
    const int R = groups.n_groups();
    v.view.resize(static_cast<std::size_t>(R));
    v.position.assign(static_cast<std::size_t>(data.n_samples()), -1);
    for (int r = 0; r < R; ++r) {
        const SampleSet& H = groups.members[static_cast<std::size_t>(r)];
        for (std::size_t t = 0; t < H.size(); ++t) v.position[static_cast<std::size_t>(H[t])] = static_cast<Index>(t);
        for (int k : groups.sources[static_cast<std::size_t>(r)])
            v.view[static_cast<std::size_t>(r)].push_back(imputed_rows(model, data, groups, r, H, k));
    }
    return v;
}

}  // namespace blockinfer
