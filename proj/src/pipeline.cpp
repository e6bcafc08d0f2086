#include "blockinfer/pipeline.hpp"

#include "blockinfer/rng.hpp"

#include <algorithm>
#include <cmath>

namespace blockinfer {

SampleSet theory_split(const SemiSupervisedDataset& data, const GroupStructure& groups, double fraction,
                       std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction outside (0, 1)");
    Rng rng(seed);
    const SampleSet sup = data.supervised();
    SampleSet out;
    for (int r = 0; r < groups.n_groups(); ++r) {
        SampleSet m = pool_members(groups, sup, r);
        rng.shuffle(m);
        const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * m.size())));
        if (keep >= m.size() && m.size() > 0)
            throw InsufficientSamples("theory split leaves no supervised sample of a group for imputation");
        out.insert(out.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(std::min(keep, m.size())));
    }
    std::sort(out.begin(), out.end());
    return out;
}

PipelineResult run_pipeline(const SemiSupervisedDataset& data, const GroupStructure& groups,
                            const std::vector<Index>& coords, const PipelineOptions& opt,
                            const Vector& null_values) {
    PipelineResult res;
    SampleSet fit_pool = data.all_samples();
    res.inference_pool = data.supervised();
    if (opt.split == SplitMode::Theory) {
        res.inference_pool = theory_split(data, groups, opt.split_fraction, opt.cv.seed ^ 0x5eedULL);
        SampleSet rest;
        std::set_difference(fit_pool.begin(), fit_pool.end(), res.inference_pool.begin(), res.inference_pool.end(),
                            std::back_inserter(rest));
        fit_pool = std::move(rest);
    }
    res.model = fit_imputation(data, groups, opt.tau, fit_pool);
    res.views = materialize_views(res.model, data, groups);

    if (opt.lambda_cv) {
        res.fit = cv_fit(data, groups, res.views, res.inference_pool, opt.cv);
    } else {
        const EstimatingSystem s =
            build_system(data, groups, res.views, res.inference_pool, {}, SystemOptions{false, false, opt.wn_pool});
        res.fit = fit_dantzig(s, opt.lambda, opt.cv.lp);
    }
    if (coords.empty()) return res;

    res.system = build_system(data, groups, res.views, res.inference_pool, data.all_samples(),
                              SystemOptions{true, true, opt.wn_pool});
    res.report = infer(data, groups, res.views, *res.system, res.fit.beta_hat, coords, opt.inference, null_values);
    return res;
}

}  // namespace blockinfer
