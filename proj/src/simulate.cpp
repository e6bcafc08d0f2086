#include "blockinfer/simulate.hpp"

#include "blockinfer/parallel.hpp"
#include "blockinfer/rng.hpp"
#include "blockinfer/solvers/lasso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace blockinfer {

std::string to_string(Mechanism m) {
    switch (m) {
        case Mechanism::InformativeResponse: return "informative-response";
        case Mechanism::InformativeAuxiliary: return "informative-auxiliary";
        case Mechanism::Mcar: return "mcar";
    }
    return "unknown";
}

Index SettingConfig::p() const { return std::accumulate(p_src.begin(), p_src.end(), Index{0}); }
Index SettingConfig::q() const { return std::accumulate(q_src.begin(), q_src.end(), Index{0}); }

Index SettingConfig::default_coordinate() const {
    if (p_src.size() < 2) return 0;
    return p_src[0];
}

void SettingConfig::check() const {
    auto bad = [](const std::string& m) { throw std::invalid_argument("setting: " + m); };
    if (p_src.empty() || p_src.size() != q_src.size()) bad("p_src and q_src must be nonempty and aligned");
    for (std::size_t s = 0; s < p_src.size(); ++s)
        if (p_src[s] < 1 || q_src[s] < 0 || q_src[s] > p_src[s]) bad("source sizes out of range");
    if (n_r.empty() || n_r.size() != missing_source.size()) bad("n_r and missing_source must be aligned");
    if (std::accumulate(n_r.begin(), n_r.end(), Index{0}) != n) bad("sum of n_r differs from n");
    for (Index v : n_r)
        if (v < 1) bad("every group needs a supervised sample");
    if (N < 0) bad("N must be nonnegative");
    if (!(noise_sd >= 0.0)) bad("noise_sd must be nonnegative");
    for (int s : missing_source)
        if (s < -1 || s >= static_cast<int>(p_src.size())) bad("missing_source out of range");
    if (missing_source[0] != -1) bad("group 1 must be complete");
    Index m = 0;
    for (std::size_t t = 0; t < correlated.size(); ++t) {
        if (correlated[t] < 0 || correlated[t] >= static_cast<int>(p_src.size())) bad("correlated source out of range");
        if (t > 0 && correlated[t] != correlated[t - 1] + 1) bad("correlated sources must be contiguous");
        m += p_src[static_cast<std::size_t>(correlated[t])];
    }
    if (m > 1 && !(rho > -1.0 / static_cast<double>(m - 1) && rho < 1.0)) bad("rho outside the positive-definite range");
    if (mechanism == Mechanism::InformativeAuxiliary &&
        (auxiliary_source < 0 || auxiliary_source >= static_cast<int>(p_src.size())))
        bad("auxiliary mechanism needs an auxiliary source");
}

SettingConfig setting_config(int setting, double rho) {
    SettingConfig c;
    c.rho = rho;
    c.beta_s = 0.2;
    c.correlated = {1, 2};
    c.missing_source = {-1, 2, 1, 0};
    switch (setting) {
        case 1:
        case 2:
            c.name = "setting" + std::to_string(setting);
            c.n = 150;
            c.N = 300;
            c.p_src = {setting == 1 ? 115 : 615, 45, 40};
            c.q_src = {5, 2, 2};
            c.n_r = {30, 70, 25, 25};
            c.mechanism = Mechanism::InformativeResponse;
            break;
        case 3:
            c.name = "setting3";
            c.n = 120;
            c.N = 750;
            c.p_src = {115, 40, 40, 5};
            c.q_src = {4, 2, 2, 1};
            c.n_r = {15, 65, 20, 20};
            c.mechanism = Mechanism::InformativeAuxiliary;
            c.auxiliary_source = 3;
            break;
        default: throw std::invalid_argument("setting must be 1, 2 or 3");
    }
    return c;
}

SettingConfig complete_config(Index n, Index p, Index s, double beta_s) {
    SettingConfig c;
    c.name = "complete";
    c.n = n;
    c.N = 0;
    c.p_src = {p};
    c.q_src = {s};
    c.beta_s = beta_s;
    c.n_r = {n};
    c.missing_source = {-1};
    c.mechanism = Mechanism::Mcar;
    return c;
}

std::vector<Index> group_quotas(const SettingConfig& c) {
    const Index total = c.n + c.N;
    const std::size_t R = c.n_r.size();
    std::vector<Index> m(R);
    std::vector<std::pair<double, std::size_t>> rem(R);
    Index used = 0;
    for (std::size_t r = 0; r < R; ++r) {
        const double exact = static_cast<double>(total) * static_cast<double>(c.n_r[r]) / static_cast<double>(c.n);
        m[r] = static_cast<Index>(std::floor(exact));
        rem[r] = {exact - static_cast<double>(m[r]), r};
        used += m[r];
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (Index t = 0; t < total - used; ++t) ++m[rem[static_cast<std::size_t>(t) % R].second];
    for (std::size_t r = 0; r < R; ++r)
        if (m[r] < c.n_r[r]) {
            std::ostringstream os;
            os << "group " << r + 1 << " quota " << m[r] << " is below its " << c.n_r[r] << " supervised samples";
            throw QuotaMismatch(os.str());
        }
    return m;
}

SimulatedData generate(const SettingConfig& c, std::uint64_t seed) {
    c.check();
    const std::vector<Index> quota = group_quotas(c);
    const Index p = c.p(), total = c.n + c.N;
    const std::size_t R = c.n_r.size(), S = c.p_src.size();
    std::vector<Index> src_off(S + 1, 0);
    for (std::size_t s = 0; s < S; ++s) src_off[s + 1] = src_off[s] + c.p_src[s];

    Rng rng(seed);
    Matrix X(total, p);
    for (Index i = 0; i < total; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    if (!c.correlated.empty()) {
        const Index lo = src_off[static_cast<std::size_t>(c.correlated.front())];
        const Index hi = src_off[static_cast<std::size_t>(c.correlated.back()) + 1];
        const Index m = hi - lo;
        Matrix A = Matrix::Constant(m, m, c.rho);
        A.diagonal().setOnes();
        const Matrix L = A.llt().matrixL();
        X.middleCols(lo, m) = X.middleCols(lo, m) * L.transpose();
    }
    Vector beta = Vector::Zero(p);
    for (std::size_t s = 0; s < S; ++s) beta.segment(src_off[s], c.q_src[s]).setConstant(c.beta_s);
    Vector y = X * beta;
    for (Index i = 0; i < total; ++i) y(i) += c.noise_sd * rng.normal();

    // Assignment to configured groups.
    std::vector<int> grp(static_cast<std::size_t>(total), -1);
    std::vector<Index> rest;
    if (c.mechanism == Mechanism::Mcar) {
        for (Index i = 0; i < total; ++i) rest.push_back(i);
    } else {
        Vector score(total);
        if (c.mechanism == Mechanism::InformativeResponse) {
            score = y;
        } else {
            const auto a = static_cast<std::size_t>(c.auxiliary_source);
            score = X.middleCols(src_off[a], c.p_src[a]).rowwise().sum();
        }
        const double smin = score.minCoeff();
        std::vector<double> w(static_cast<std::size_t>(total));
        for (Index i = 0; i < total; ++i) w[static_cast<std::size_t>(i)] = std::exp(-c.weight_scale * (score(i) - smin));
        for (Index t = 0; t < quota[0]; ++t) {
            double sum = 0.0;
            for (double v : w) sum += v;
            Index pick = -1;
            if (sum > 0.0) {
                double u = rng.uniform() * sum;
                for (Index i = 0; i < total; ++i) {
                    const double v = w[static_cast<std::size_t>(i)];
                    if (v <= 0.0) continue;
                    pick = i;
                    if (u < v) break;
                    u -= v;
                }
            } else {  // all remaining weights underflowed
                Index left = 0;
                for (Index i = 0; i < total; ++i) left += grp[static_cast<std::size_t>(i)] < 0;
                Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(left)));
                for (Index i = 0; i < total; ++i)
                    if (grp[static_cast<std::size_t>(i)] < 0 && k-- == 0) pick = i;
            }
            grp[static_cast<std::size_t>(pick)] = 0;
            w[static_cast<std::size_t>(pick)] = 0.0;
        }
        for (Index i = 0; i < total; ++i)
            if (grp[static_cast<std::size_t>(i)] < 0) rest.push_back(i);
    }
    rng.shuffle(rest);
    {
        std::size_t pos = 0;
        for (std::size_t r = c.mechanism == Mechanism::Mcar ? 0 : 1; r < R; ++r)
            for (Index t = 0; t < quota[r]; ++t) grp[static_cast<std::size_t>(rest[pos++])] = static_cast<int>(r);
    }

    // Rows ordered by group; exactly n_r supervised per group.
    std::vector<Index> order;
    std::vector<bool> sup_orig(static_cast<std::size_t>(total), false);
    for (std::size_t r = 0; r < R; ++r) {
        std::vector<Index> mem;
        for (Index i = 0; i < total; ++i)
            if (grp[static_cast<std::size_t>(i)] == static_cast<int>(r)) mem.push_back(i);
        order.insert(order.end(), mem.begin(), mem.end());
        rng.shuffle(mem);
        for (Index t = 0; t < c.n_r[r]; ++t) sup_orig[static_cast<std::size_t>(mem[static_cast<std::size_t>(t)])] = true;
    }

    SimulatedData out;
    SemiSupervisedDataset& d = out.data;
    d.X.resize(total, p);
    d.missing = MaskMatrix::Constant(total, p, false);
    d.y.resize(total);
    out.y_full.resize(total);
    d.y_observed.resize(static_cast<std::size_t>(total));
    out.config_group.resize(static_cast<std::size_t>(total));
    for (Index a = 0; a < total; ++a) {
        const Index i = order[static_cast<std::size_t>(a)];
        const int r = grp[static_cast<std::size_t>(i)];
        d.X.row(a) = X.row(i);
        const int ms = c.missing_source[static_cast<std::size_t>(r)];
        if (ms >= 0) {
            const auto s = static_cast<std::size_t>(ms);
            d.missing.row(a).segment(src_off[s], c.p_src[s]).setConstant(true);
            d.X.row(a).segment(src_off[s], c.p_src[s]).setConstant(kNaN);
        }
        const bool sup = sup_orig[static_cast<std::size_t>(i)];
        d.y_observed[static_cast<std::size_t>(a)] = sup;
        d.y(a) = sup ? y(i) : kNaN;
        out.y_full(a) = y(i);
        d.sample_ids.push_back("s" + std::to_string(a + 1));
        out.config_group[static_cast<std::size_t>(a)] = r;
    }
    for (Index j = 0; j < p; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
    out.groups = derive_groups(d);
    out.beta = std::move(beta);
    return out;
}

double improvement_rate(double pe_method, double pe_proposed) { return (pe_method - pe_proposed) / pe_proposed; }

namespace {

using Clock = std::chrono::steady_clock;

PipelineOptions replication_options(const HarnessOptions& h, std::uint64_t seed) {
    PipelineOptions o = h.pipeline;
    o.cv.seed = Rng::derive(seed, 1);
    o.inference.threads = 1;
    return o;
}

void record_fit(ReplicationRecord& rec, const PipelineResult& res, const Vector& beta) {
    rec.lambda = res.fit.lambda;
    rec.duality_gap = res.fit.duality_gap;
    rec.estimation_error = (res.fit.beta_hat - beta).norm();
}

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

template <class Body>
ExperimentResult run_reps(const std::string& kind, const std::string& setting, Index reps, std::uint64_t master,
                          int threads, Body body) {
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");
    const auto t0 = Clock::now();
    ExperimentResult out;
    out.kind = kind;
    out.setting = setting;
    out.reps = reps;
    out.replications.resize(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t t) {
        ReplicationRecord& rec = out.replications[t];
        rec.seed = Rng::derive(master, t);
        try {
            body(rec);
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
    });
    std::vector<double> errs;
    for (const ReplicationRecord& rec : out.replications) {
        if (!rec.ok) {
            ++out.failures;
            continue;
        }
        if (std::isfinite(rec.duality_gap)) out.max_duality_gap = std::max(out.max_duality_gap, std::abs(rec.duality_gap));
        if (std::isfinite(rec.estimation_error)) errs.push_back(rec.estimation_error);
    }
    out.median_estimation_error = median(errs);
    out.runtime_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace

ExperimentResult run_coverage(const SettingConfig& config, Index reps, const std::vector<Index>& coords,
                              const HarnessOptions& h) {
    config.check();
    for (Index j : coords)
        if (j < 0 || j >= config.p()) throw std::out_of_range("run_coverage: coordinate outside [0, p)");
    Vector truth;
    ExperimentResult out = run_reps("coverage", config.name, reps, config.seed, h.threads, [&](ReplicationRecord& rec) {
        const SimulatedData sim = generate(config, rec.seed);
        const PipelineResult res = run_pipeline(sim.data, sim.groups, coords, replication_options(h, rec.seed));
        record_fit(rec, res, sim.beta);
        if (res.report) rec.coords = res.report->records;
    });
    const double alpha = h.pipeline.inference.alpha;
    Vector beta = Vector::Zero(config.p());
    {
        Index off = 0;
        for (std::size_t s = 0; s < config.p_src.size(); ++s) {
            beta.segment(off, config.q_src[s]).setConstant(config.beta_s);
            off += config.p_src[s];
        }
    }
    for (std::size_t c = 0; c < coords.size(); ++c) {
        CoordinateSummary cs;
        cs.j = coords[c];
        cs.truth = beta(cs.j);
        double cover = 0, len = 0, rej = 0, est = 0;
        for (const ReplicationRecord& rec : out.replications) {
            if (!rec.ok) continue;
            const CoordinateRecord& cr = rec.coords[c];
            if (cr.status != CoordinateStatus::Ok) continue;
            ++cs.used;
            cover += cr.ci_lower <= cs.truth && cs.truth <= cr.ci_upper;
            len += cr.ci_upper - cr.ci_lower;
            rej += cr.p_value < alpha;
            est += cr.beta_tilde;
        }
        if (cs.used > 0) {
            const double u = static_cast<double>(cs.used);
            cs.coverage = cover / u;
            cs.coverage_se = std::sqrt(cs.coverage * (1.0 - cs.coverage) / u);
            cs.average_length = len / u;
            cs.rejection_rate = rej / u;
            cs.mean_estimate = est / u;
        }
        out.coordinates.push_back(cs);
    }
    return out;
}

ExperimentResult run_fdr_experiment(const SettingConfig& config, Index reps, double fdr_alpha,
                                    const HarnessOptions& h) {
    config.check();
    const Index p = config.p();
    std::vector<Index> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), Index{0});
    HarnessOptions hh = h;
    hh.pipeline.inference.fdr = true;
    hh.pipeline.inference.fdr_alpha = fdr_alpha;
    ExperimentResult out = run_reps("fdr", config.name, reps, config.seed, h.threads, [&](ReplicationRecord& rec) {
        const SimulatedData sim = generate(config, rec.seed);
        const PipelineResult res = run_pipeline(sim.data, sim.groups, all, replication_options(hh, rec.seed));
        record_fit(rec, res, sim.beta);
        Index fp = 0, tp = 0, signals = 0;
        for (Index j = 0; j < p; ++j) signals += sim.beta(j) != 0.0;
        for (Index j : res.report->fdr->rejected) (sim.beta(j) != 0.0 ? tp : fp) += 1;
        const Index total = fp + tp;
        rec.fdp = static_cast<double>(fp) / static_cast<double>(std::max<Index>(total, 1));
        rec.tpp = signals ? static_cast<double>(tp) / static_cast<double>(signals) : kNaN;
    });
    double fdr = 0, pw = 0;
    Index used = 0, pw_used = 0;
    for (const ReplicationRecord& rec : out.replications) {
        if (!rec.ok) continue;
        ++used;
        fdr += rec.fdp;
        if (std::isfinite(rec.tpp)) {
            ++pw_used;
            pw += rec.tpp;
        }
    }
    if (used) out.empirical_fdr = fdr / static_cast<double>(used);
    if (pw_used) out.power = pw / static_cast<double>(pw_used);
    return out;
}

namespace {

void predict_once(const SemiSupervisedDataset& full, Vector truth_y, double holdout, const HarnessOptions& h,
                  ReplicationRecord& rec, const Vector* beta) {
    Rng rng(Rng::derive(rec.seed, 2));
    SampleSet sup = full.supervised();
    const auto hide = static_cast<std::size_t>(std::lround(holdout * static_cast<double>(sup.size())));
    if (hide < 1 || hide >= sup.size()) throw std::invalid_argument("holdout leaves no test or no training sample");
    rng.shuffle(sup);
    SampleSet test(sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(hide));
    std::sort(test.begin(), test.end());

    SemiSupervisedDataset d = full;
    for (Index i : test) {
        d.y_observed[static_cast<std::size_t>(i)] = false;
        d.y(i) = kNaN;
    }
    const GroupStructure groups = derive_groups(d);
    const PipelineResult res = run_pipeline(d, groups, {}, replication_options(h, rec.seed));
    if (beta) record_fit(rec, res, *beta);
    else {
        rec.lambda = res.fit.lambda;
        rec.duality_gap = res.fit.duality_gap;
    }

    const SampleSet train = d.supervised();
    double ybar = 0.0;
    for (Index i : train) ybar += d.y(i);
    ybar /= static_cast<double>(train.size());

    double mp = 0.0, mn = 0.0;
    for (Index i : test) {
        const double e = truth_y(i) - predict_sample(groups, res.views, i, res.fit.beta_hat);
        mp += e * e;
        mn += (truth_y(i) - ybar) * (truth_y(i) - ybar);
    }
    const double nt = static_cast<double>(test.size());
    rec.mse_proposed = mp / nt;
    rec.mse_naive = mn / nt;

    // Complete-case Lasso on fully observed training rows.
    SampleSet cc;
    for (Index i : train)
        if (!d.missing.row(i).any()) cc.push_back(i);
    const Index p = d.n_covariates();
    if (cc.size() < 2) {
        rec.cc_skipped = true;
        return;
    }
    Matrix Z(static_cast<Index>(cc.size()), p);
    Vector t(static_cast<Index>(cc.size()));
    for (std::size_t a = 0; a < cc.size(); ++a) {
        Z.row(static_cast<Index>(a)) = d.X.row(cc[a]);
        t(static_cast<Index>(a)) = d.y(cc[a]);
    }
    const Vector means = Z.colwise().mean().transpose();
    const auto grid = default_tau_grid(Z, t);
    const int folds = static_cast<int>(std::min<std::size_t>(10, cc.size()));
    const LassoCvResult lc = lasso_cv(Z, t, folds, grid);
    double mc = 0.0;
    for (Index i : test) {
        double pred = 0.0;
        for (Index j = 0; j < p; ++j) pred += (d.missing(i, j) ? means(j) : d.X(i, j)) * lc.coefficients(j);
        mc += (truth_y(i) - pred) * (truth_y(i) - pred);
    }
    rec.mse_cc = mc / nt;
}

void summarize_prediction(ExperimentResult& out) {
    auto row = [&](const std::string& name, double ReplicationRecord::*field) {
        PredictionRow pr;
        pr.method = name;
        std::vector<double> v;
        for (const ReplicationRecord& rec : out.replications)
            if (rec.ok && std::isfinite(rec.*field)) v.push_back(rec.*field);
        pr.used = static_cast<Index>(v.size());
        if (!v.empty()) {
            const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - m) * (x - m);
            pr.mean_mse = m;
            pr.sd_mse = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        }
        return pr;
    };
    PredictionRow prop = row("proposed", &ReplicationRecord::mse_proposed);
    PredictionRow naive = row("naive_mean", &ReplicationRecord::mse_naive);
    PredictionRow cc = row("complete_case_lasso", &ReplicationRecord::mse_cc);
    naive.improvement_rate = improvement_rate(naive.mean_mse, prop.mean_mse);
    cc.improvement_rate = improvement_rate(cc.mean_mse, prop.mean_mse);
    Index skipped = 0;
    for (const ReplicationRecord& rec : out.replications) skipped += rec.ok && rec.cc_skipped;
    if (skipped) cc.flag = "NoCompleteCases in " + std::to_string(skipped) + " replication(s)";
    out.prediction = {prop, naive, cc};
}

}  // namespace

ExperimentResult run_prediction(const SettingConfig& config, Index reps, double holdout, const HarnessOptions& h) {
    config.check();
    ExperimentResult out = run_reps("prediction", config.name, reps, config.seed, h.threads, [&](ReplicationRecord& rec) {
        SettingConfig c = config;
        const SimulatedData sim = generate(c, rec.seed);
        predict_once(sim.data, sim.data.y, holdout, h, rec, &sim.beta);
    });
    summarize_prediction(out);
    return out;
}

ExperimentResult run_prediction(const SemiSupervisedDataset& data, Index reps, double holdout, std::uint64_t seed,
                                const HarnessOptions& h) {
    ExperimentResult out = run_reps("prediction", "data", reps, seed, h.threads,
                                    [&](ReplicationRecord& rec) { predict_once(data, data.y, holdout, h, rec, nullptr); });
    summarize_prediction(out);
    return out;
}

}  // namespace blockinfer
