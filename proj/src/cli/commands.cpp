#include "blockinfer/cli/commands.hpp"

#include "blockinfer/parallel.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace blockinfer::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write '" + tmp + "'");
        f << content;
        f.flush();
        if (!f) throw Error("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move '" + tmp + "' into place");
    }
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string describe(DebiasDenominator d) { return d == DebiasDenominator::ExactRoot ? "exact" : "gradient"; }
std::string describe(VarianceForm v) { return v == VarianceForm::PerView ? "per-view" : "clustered"; }

std::string covariate_name(const SemiSupervisedDataset& d, Index j) {
    return static_cast<std::size_t>(j) < d.covariate_names.size() ? d.covariate_names[static_cast<std::size_t>(j)]
                                                                   : "x" + std::to_string(j + 1);
}

json one_based(const IndexSet& s) {
    json a = json::array();
    for (Index j : s) a.push_back(j + 1);
    return a;
}

json groups_json(const GroupStructure& g) {
    json a = json::array();
    for (int r = 0; r < g.n_groups(); ++r) {
        const auto u = static_cast<std::size_t>(r);
        json sources = json::array();
        for (int k : g.sources[u]) sources.push_back(k + 1);
        a.push_back({{"group", r + 1},
                     {"samples", g.members[u].size()},
                     {"supervised", g.n_supervised[u]},
                     {"unsupervised", g.n_unsupervised[u]},
                     {"missing_covariates", one_based(g.missing[u])},
                     {"sources", sources}});
    }
    return a;
}

json fit_json(const FitResult& f, const SemiSupervisedDataset& d, bool cv) {
    json cvj = nullptr;
    if (cv) {
        json table = json::array();
        for (const CvPoint& pt : f.cv_table)
            table.push_back({{"lambda", pt.lambda}, {"loss", num(pt.loss)}, {"feasible", pt.feasible}});
        cvj = {{"folds", f.cv_folds},
               {"stratified", f.cv_stratified},
               {"grid_shifted", f.cv_grid_shifted},
               {"table", table}};
    }
    json coef = json::array();
    for (Index j = 0; j < f.beta_hat.size(); ++j)
        coef.push_back({{"index", j + 1}, {"name", covariate_name(d, j)}, {"beta_hat", f.beta_hat(j)}});
    return {{"lambda", f.lambda},
            {"lambda_policy", cv ? "cv" : "fixed"},
            {"cross_validation", cvj},
            {"diagnostics",
             {{"feasibility_slack", f.feasibility_slack},
              {"duality_gap", f.duality_gap},
              {"lp_iterations", f.lp_iterations}}},
            {"coefficients", coef}};
}

std::string coefficients_csv(const FitResult& f, const SemiSupervisedDataset& d) {
    std::ostringstream os;
    os << "index,name,beta_hat\n";
    for (Index j = 0; j < f.beta_hat.size(); ++j)
        os << j + 1 << ',' << covariate_name(d, j) << ',' << format_double(f.beta_hat(j)) << '\n';
    return os.str();
}

struct Loaded {
    SemiSupervisedDataset data;
    GroupStructure groups;
};

Loaded load(const RunConfig& c) {
    if (c.data_path.empty()) throw ConfigError("data.path: this command needs --data");
    Loaded l;
    l.data = read_dataset_file(c.data_path, c.csv);
    l.groups = derive_groups(l.data);
    validate(l.data, l.groups);
    return l;
}

std::string out_path(const RunConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

void emit(CommandOutcome& o, const std::string& path, const std::string& content) {
    write_atomic(path, content);
    o.files.push_back(path);
}

json setting_json(const SettingConfig& s) {
    return {{"name", s.name},
            {"n", s.n},
            {"N", s.N},
            {"p", s.p()},
            {"source_sizes", s.p_src},
            {"relevant_per_source", s.q_src},
            {"beta_s", s.beta_s},
            {"rho", s.rho},
            {"supervised_per_group", s.n_r},
            {"group_quotas", group_quotas(s)},
            {"missing_source_per_group", s.missing_source},
            {"mechanism", to_string(s.mechanism)},
            {"seed", s.seed}};
}

json experiment_json(const ExperimentResult& r) {
    std::map<std::string, int> errors;
    for (const ReplicationRecord& rec : r.replications)
        if (!rec.ok) ++errors[rec.error];
    json err = json::array();
    for (const auto& [m, k] : errors) err.push_back({{"message", m}, {"count", k}});
    json coords = json::array();
    for (const CoordinateSummary& s : r.coordinates)
        coords.push_back({{"index", s.j + 1},
                          {"truth", s.truth},
                          {"used", s.used},
                          {"coverage", num(s.coverage)},
                          {"coverage_se", num(s.coverage_se)},
                          {"average_length", num(s.average_length)},
                          {"rejection_rate", num(s.rejection_rate)},
                          {"mean_estimate", num(s.mean_estimate)}});
    json pred = json::array();
    for (const PredictionRow& p : r.prediction)
        pred.push_back({{"method", p.method},
                        {"used", p.used},
                        {"mean_mse", num(p.mean_mse)},
                        {"sd_mse", num(p.sd_mse)},
                        {"improvement_rate", num(p.improvement_rate)},
                        {"flag", p.flag}});
    json out = {{"kind", r.kind},
                {"replications", r.reps},
                {"failures", r.failures},
                {"failure_messages", err},
                {"coordinates", coords},
                {"empirical_fdr", r.empirical_fdr ? num(*r.empirical_fdr) : json(nullptr)},
                {"power", r.power ? num(*r.power) : json(nullptr)},
                {"prediction", pred},
                {"max_duality_gap", r.max_duality_gap},
                {"median_estimation_error", num(r.median_estimation_error)}};
    return out;
}

std::string replications_csv(const ExperimentResult& r) {
    std::ostringstream os;
    os << "rep,seed,ok,lambda,duality_gap,estimation_error";
    const std::size_t nc = r.coordinates.size();
    for (std::size_t c = 0; c < nc; ++c) {
        const std::string j = std::to_string(r.coordinates[c].j + 1);
        os << ",status_" << j << ",beta_tilde_" << j << ",s_hat_" << j << ",ci_lower_" << j << ",ci_upper_" << j
           << ",p_value_" << j;
    }
    os << ",fdp,tpp,mse_proposed,mse_naive,mse_cc,error\n";
    for (std::size_t t = 0; t < r.replications.size(); ++t) {
        const ReplicationRecord& rec = r.replications[t];
        os << t + 1 << ',' << rec.seed << ',' << (rec.ok ? 1 : 0) << ',' << format_double(rec.lambda) << ','
           << format_double(rec.duality_gap) << ',' << format_double(rec.estimation_error);
        for (std::size_t c = 0; c < nc; ++c) {
            if (rec.ok && c < rec.coords.size()) {
                const CoordinateRecord& cr = rec.coords[c];
                os << ',' << to_string(cr.status) << ',' << format_double(cr.beta_tilde) << ','
                   << format_double(cr.s_hat) << ',' << format_double(cr.ci_lower) << ','
                   << format_double(cr.ci_upper) << ',' << format_double(cr.p_value);
            } else {
                os << ",NA,NA,NA,NA,NA,NA";
            }
        }
        std::string e = rec.error;
        for (char& ch : e)
            if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
        os << ',' << format_double(rec.fdp) << ',' << format_double(rec.tpp) << ','
           << format_double(rec.mse_proposed) << ',' << format_double(rec.mse_naive) << ','
           << (rec.cc_skipped ? std::string("NA") : format_double(rec.mse_cc)) << ',' << e << '\n';
    }
    return os.str();
}

void write_timing(CommandOutcome& o, const RunConfig& c, double seconds) {
    json t = {{"runtime_seconds", seconds}, {"threads", c.threads}};
    emit(o, out_path(c, "timing.json"), t.dump(2) + "\n");
}

SettingConfig simulation_setting(const RunConfig& c) {
    SettingConfig s = setting_config(c.setting, c.rho);
    if (c.sim_N) s.N = *c.sim_N;
    s.seed = c.seed;
    s.check();
    return s;
}

HarnessOptions harness(const RunConfig& c) {
    HarnessOptions h;
    h.pipeline = c.pipeline;
    h.threads = c.threads;
    return h;
}

}  // namespace

json provenance(const RunConfig& c) {
    const PipelineOptions& po = c.pipeline;
    json config = json::object();
    for (const auto& [k, v] : c.values) config[k] = v;
    return {
        {"tool", "blockinfer"},
        {"version", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"command", c.command},
        {"seed", c.seed},
        {"config", config},
        {"pools",
         {{"imputation", po.split == SplitMode::None ? "all samples" : "all samples minus the reserved supervised split"},
          {"inference", po.split == SplitMode::None ? "supervised samples" : "reserved supervised split"},
          {"projection_gradient", "all samples"},
          {"projection_weight", po.wn_pool == WnPool::Projection ? "all samples" : "inference pool"}}},
        {"decisions",
         {{"tau_policy", po.tau.describe()},
          {"lambda_policy", po.lambda_cv ? std::to_string(po.cv.folds) + "-fold cv, stratified by group when possible"
                                         : "fixed"},
          {"debias_denominator", describe(po.inference.denominator)},
          {"variance_form", describe(po.inference.variance)},
          {"variance_weights", "supervised counts per group"},
          {"lambda_prime_escalation",
           {{"factor", po.inference.escalation.factor}, {"max", po.inference.escalation.max_escalations}}}}},
    };
}

CommandOutcome cmd_impute(const RunConfig& c) {
    CommandOutcome o;
    const Loaded l = load(c);
    SampleSet pool = l.data.all_samples();
    if (c.pipeline.split == SplitMode::Theory) {
        const SampleSet reserved = theory_split(l.data, l.groups, c.pipeline.split_fraction, c.seed ^ 0x5eedULL);
        SampleSet rest;
        std::set_difference(pool.begin(), pool.end(), reserved.begin(), reserved.end(), std::back_inserter(rest));
        pool = std::move(rest);
    }
    const ImputationModel model = fit_imputation(l.data, l.groups, c.pipeline.tau, pool);
    const ImputedViews views = materialize_views(model, l.data, l.groups);

    json regs = json::array();
    bool all_converged = true;
    for (const auto& [key, coef] : model.coef) {
        const auto& taus = model.tau.at(key);
        const auto& conv = model.converged.at(key);
        json t = json::array();
        for (double v : taus) t.push_back(v);
        bool ok = true;
        for (bool b : conv) ok = ok && b;
        all_converged = all_converged && ok;
        regs.push_back({{"group", key.first + 1},
                        {"source", key.second + 1},
                        {"overlap_size", coef.rows()},
                        {"imputed_covariates", coef.cols()},
                        {"tau", t},
                        {"converged", ok}});
    }
    json rep = {{"provenance", provenance(c)},
                {"samples", l.data.n_samples()},
                {"covariates", l.data.n_covariates()},
                {"groups", groups_json(l.groups)},
                {"regressions", regs}};
    emit(o, out_path(c, "imputation.json"), rep.dump(2) + "\n");

    std::ostringstream os;
    os << "sample,group,source";
    for (Index j = 0; j < l.data.n_covariates(); ++j) os << ',' << covariate_name(l.data, j);
    os << '\n';
    for (Index i = 0; i < l.data.n_samples(); ++i) {
        const int r = l.groups.group_of[static_cast<std::size_t>(i)];
        const auto& src = l.groups.sources[static_cast<std::size_t>(r)];
        for (std::size_t t = 0; t < src.size(); ++t) {
            os << l.data.sample_ids[static_cast<std::size_t>(i)] << ',' << r + 1 << ',' << src[t] + 1;
            const auto row = views.row(l.groups, i, t);
            for (Index j = 0; j < row.size(); ++j) os << ',' << format_double(row(j));
            os << '\n';
        }
    }
    emit(o, out_path(c, "imputed_views.csv"), os.str());
    o.summary = std::to_string(model.n_regressions()) + " imputation regressions over " +
                std::to_string(l.groups.n_groups()) + " groups";
    if (!all_converged) {
        o.exit_code = 2;
        o.summary += "; some regressions did not converge";
    }
    return o;
}

CommandOutcome cmd_fit(const RunConfig& c) {
    CommandOutcome o;
    const Loaded l = load(c);
    const PipelineResult res = run_pipeline(l.data, l.groups, {}, c.pipeline);
    json rep = {{"provenance", provenance(c)},
                {"samples", l.data.n_samples()},
                {"supervised", l.data.supervised().size()},
                {"covariates", l.data.n_covariates()},
                {"groups", groups_json(l.groups)},
                {"fit", fit_json(res.fit, l.data, c.pipeline.lambda_cv)}};
    emit(o, out_path(c, "fit.json"), rep.dump(2) + "\n");
    emit(o, out_path(c, "coefficients.csv"), coefficients_csv(res.fit, l.data));
    Index nz = 0;
    for (Index j = 0; j < res.fit.beta_hat.size(); ++j) nz += res.fit.beta_hat(j) != 0.0;
    o.summary = "lambda " + format_double(res.fit.lambda) + ", " + std::to_string(nz) + " nonzero coefficients";
    return o;
}

CommandOutcome cmd_infer(const RunConfig& c) {
    CommandOutcome o;
    const Loaded l = load(c);
    const Index p = l.data.n_covariates();
    std::vector<Index> coords = c.coordinates;
    for (Index j : coords)
        if (j >= p) throw ConfigError("infer.coordinates: coordinate " + std::to_string(j + 1) + " exceeds p");
    if (coords.empty())
        for (Index j = 0; j < p; ++j) coords.push_back(j);
    const PipelineResult res = run_pipeline(l.data, l.groups, coords, c.pipeline);
    const InferenceReport& ir = *res.report;

    json recs = json::array();
    std::ostringstream csv;
    csv << "index,name,status,beta_hat,beta_tilde,s_hat,ci_lower,ci_upper,T,p_value,lambda_prime,escalations,"
           "denominator\n";
    Index failed = 0;
    for (const CoordinateRecord& r : ir.records) {
        failed += r.status != CoordinateStatus::Ok;
        recs.push_back({{"index", r.j + 1},
                        {"name", covariate_name(l.data, r.j)},
                        {"status", to_string(r.status)},
                        {"message", r.message},
                        {"beta_hat", r.beta_hat},
                        {"beta_tilde", num(r.beta_tilde)},
                        {"s_hat", num(r.s_hat)},
                        {"ci_lower", num(r.ci_lower)},
                        {"ci_upper", num(r.ci_upper)},
                        {"T", num(r.T)},
                        {"p_value", num(r.p_value)},
                        {"lambda_prime", num(r.lambda_prime_used)},
                        {"escalations", r.escalations},
                        {"denominator", num(r.denominator)}});
        csv << r.j + 1 << ',' << covariate_name(l.data, r.j) << ',' << to_string(r.status) << ','
            << format_double(r.beta_hat) << ',' << format_double(r.beta_tilde) << ',' << format_double(r.s_hat) << ','
            << format_double(r.ci_lower) << ',' << format_double(r.ci_upper) << ',' << format_double(r.T) << ','
            << format_double(r.p_value) << ',' << format_double(r.lambda_prime_used) << ',' << r.escalations << ','
            << format_double(r.denominator) << '\n';
    }
    json fdr = nullptr;
    if (ir.fdr) {
        json sel = json::array();
        for (Index j : ir.fdr->rejected) sel.push_back(j + 1);
        fdr = {{"alpha", c.pipeline.inference.fdr_alpha},
               {"threshold", ir.fdr->t_hat},
               {"empty_infimum", ir.fdr->empty_infimum},
               {"selected", sel}};
    }
    json rep = {{"provenance", provenance(c)},
                {"samples", l.data.n_samples()},
                {"supervised", res.inference_pool.size()},
                {"covariates", p},
                {"groups", groups_json(l.groups)},
                {"fit", fit_json(res.fit, l.data, c.pipeline.lambda_cv)},
                {"alpha", ir.alpha},
                {"sigma_hat_sq", ir.sigma_hat_sq},
                {"projection_dual_path", res.system ? LinfQpSolver(res.system->Wn, res.system->Gn).range_condition()
                                                    : false},
                {"records", recs},
                {"fdr", fdr}};
    emit(o, out_path(c, "inference.json"), rep.dump(2) + "\n");
    emit(o, out_path(c, "inference.csv"), csv.str());
    emit(o, out_path(c, "coefficients.csv"), coefficients_csv(res.fit, l.data));
    o.summary = std::to_string(ir.records.size()) + " coordinates, " + std::to_string(failed) + " failed";
    if (ir.fdr) o.summary += ", " + std::to_string(ir.fdr->rejected.size()) + " selected";
    if (failed) o.exit_code = 2;
    return o;
}

CommandOutcome cmd_simulate(const RunConfig& c) {
    CommandOutcome o;
    const SettingConfig s = simulation_setting(c);
    const HarnessOptions h = harness(c);
    ExperimentResult r;
    if (c.experiment == "coverage" || c.experiment == "estimation") {
        std::vector<Index> coords;
        if (c.experiment == "coverage") {
            const Index j = c.sim_coordinate.value_or(s.default_coordinate());
            if (j >= s.p()) throw ConfigError("simulate.coordinate: exceeds p");
            coords.push_back(j);
        }
        r = run_coverage(s, c.reps, coords, h);
    } else if (c.experiment == "fdr") {
        r = run_fdr_experiment(s, c.reps, c.pipeline.inference.fdr_alpha, h);
    } else {
        r = run_prediction(s, c.reps, c.holdout, h);
    }
    json rep = {{"provenance", provenance(c)}, {"setting", setting_json(s)}, {"result", experiment_json(r)}};
    emit(o, out_path(c, "simulation.json"), rep.dump(2) + "\n");
    emit(o, out_path(c, "replications.csv"), replications_csv(r));
    write_timing(o, c, r.runtime_seconds);
    std::ostringstream os;
    os << c.experiment << " over " << r.reps << " replications, " << r.failures << " failed";
    for (const CoordinateSummary& cs : r.coordinates)
        os << "; coordinate " << cs.j + 1 << ": coverage " << cs.coverage << " (se " << cs.coverage_se
           << "), average length " << cs.average_length;
    if (r.empirical_fdr) os << "; FDR " << *r.empirical_fdr;
    if (r.power) os << "; power " << *r.power;
    if (!r.prediction.empty()) os << "; proposed MSE " << r.prediction[0].mean_mse;
    o.summary = os.str();
    if (r.failures) o.exit_code = 2;
    return o;
}

CommandOutcome cmd_predict(const RunConfig& c) {
    CommandOutcome o;
    const HarnessOptions h = harness(c);
    ExperimentResult r;
    json source;
    if (!c.data_path.empty()) {
        const Loaded l = load(c);
        r = run_prediction(l.data, c.reps, c.holdout, c.seed, h);
        source = {{"data", c.data_path}, {"samples", l.data.n_samples()}, {"groups", groups_json(l.groups)}};
    } else {
        const SettingConfig s = simulation_setting(c);
        r = run_prediction(s, c.reps, c.holdout, h);
        source = {{"setting", setting_json(s)}};
    }
    json rep = {{"provenance", provenance(c)},
                {"source", source},
                {"holdout", c.holdout},
                {"improvement_rate_definition", "(PE_method - PE_proposed) / PE_proposed"},
                {"result", experiment_json(r)}};
    emit(o, out_path(c, "prediction.json"), rep.dump(2) + "\n");
    std::ostringstream csv;
    csv << "method,used,mean_mse,sd_mse,improvement_rate,flag\n";
    for (const PredictionRow& p : r.prediction)
        csv << p.method << ',' << p.used << ',' << format_double(p.mean_mse) << ',' << format_double(p.sd_mse) << ','
            << format_double(p.improvement_rate) << ',' << p.flag << '\n';
    emit(o, out_path(c, "prediction.csv"), csv.str());
    emit(o, out_path(c, "replications.csv"), replications_csv(r));
    write_timing(o, c, r.runtime_seconds);
    std::ostringstream os;
    os << "prediction over " << r.reps << " replications";
    for (const PredictionRow& p : r.prediction) os << "; " << p.method << " " << p.mean_mse;
    o.summary = os.str();
    if (r.failures) o.exit_code = 2;
    return o;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semi-supervised sparse regression with blockwise-missing covariates"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    static const Flag flags[] = {
        {"--data", "data.path", "input CSV"},
        {"--out", "output.dir", "output directory"},
        {"--alpha", "infer.alpha", "1 - confidence level"},
        {"--lambda", "fit.lambda", "F or cv"},
        {"--lambda-prime", "infer.lambda_prime", "initial projection radius"},
        {"--tau", "impute.tau", "F, rate or cv"},
        {"--setting", "simulate.setting", "1, 2 or 3"},
        {"--reps", "simulate.reps", "replications"},
        {"--rho", "simulate.rho", "exchangeable correlation"},
        {"--seed", "run.seed", "master seed"},
        {"--threads", "run.threads", "worker count"},
        {"--split-mode", "pools.split_mode", "none or theory"},
        {"--wn-pool", "pools.wn_pool", "all or supervised"},
        {"--coords", "infer.coordinates", "1-based coordinates, e.g. 1-5,8"},
        {"--experiment", "simulate.experiment", "coverage, fdr, prediction or estimation"},
        {"--fdr", "infer.fdr", "true or false"},
    };
    const char* names[] = {"fit", "infer", "impute", "simulate", "predict"};
    const char* helps[] = {"fit the sparse estimator", "debiased estimates, intervals and tests",
                           "fit and write the imputed views", "Monte-Carlo experiments on synthetic settings",
                           "held-out prediction comparison"};

    std::map<std::string, std::string> storage;
    std::map<std::string, std::string> config_path;
    std::vector<std::pair<CLI::App*, std::vector<std::pair<CLI::Option*, std::string>>>> subs;
    for (std::size_t s = 0; s < 5; ++s) {
        CLI::App* sub = app.add_subcommand(names[s], helps[s]);
        std::vector<std::pair<CLI::Option*, std::string>> opts;
        sub->add_option("--config", config_path[names[s]], "key = value configuration file");
        for (const Flag& f : flags) {
            std::string& slot = storage[std::string(names[s]) + f.key];
            opts.emplace_back(sub->add_option(f.name, slot, f.help), f.key);
        }
        subs.emplace_back(sub, std::move(opts));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        for (auto& [sub, opts] : subs) {
            if (!sub->parsed()) continue;
            const std::string name = sub->get_name();
            std::map<std::string, std::string> file_values, flag_values;
            if (!config_path[name].empty()) file_values = parse_config_file(config_path[name]);
            for (auto& [opt, key] : opts)
                if (opt->count()) flag_values[key] = storage[name + key];
            const RunConfig cfg = resolve_config(name, file_values, flag_values);
            CommandOutcome o;
            if (name == "fit") o = cmd_fit(cfg);
            else if (name == "infer") o = cmd_infer(cfg);
            else if (name == "impute") o = cmd_impute(cfg);
            else if (name == "simulate") o = cmd_simulate(cfg);
            else o = cmd_predict(cfg);
            out << o.summary << '\n';
            for (const std::string& f : o.files) out << "wrote " << f << '\n';
            return o.exit_code;
        }
    } catch (const ParseError& e) {
        err << "error: line " << e.line() << ", column " << e.column() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace blockinfer::cli
