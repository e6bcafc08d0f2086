#include "blockinfer/cli/config.hpp"

#include "blockinfer/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace blockinfer::cli {

const std::vector<KeySpec>& config_keys() {
    static const std::vector<KeySpec> keys = {
        {"data.path", "", "input CSV"},
        {"data.response", "y", "response column name"},
        {"data.na", "NA", "missing-value marker"},
        {"data.id", "", "optional sample id column"},
        {"data.center", "false", "center covariates and response at ingestion"},
        {"output.dir", "out", "directory for reports"},
        {"run.seed", "1", "master seed"},
        {"run.threads", "", "worker count (default: BLOCKINFER_THREADS, then hardware)"},
        {"impute.tau", "rate", "rate | cv | fixed value"},
        {"impute.tau_c", "0.5", "constant of the rate policy"},
        {"impute.cv_folds", "10", "folds for tau cross-validation"},
        {"fit.lambda", "cv", "cv | fixed value"},
        {"fit.cv_folds", "10", "folds for lambda cross-validation"},
        {"fit.grid_points", "20", "lambda grid size"},
        {"infer.alpha", "0.05", "interval level is 1 - alpha"},
        {"infer.lambda_prime", "default", "initial projection radius; default = 0.1 sqrt(log p / n)"},
        {"infer.escalation_factor", "1.5", "lambda' growth when infeasible"},
        {"infer.max_escalations", "20", "cap on lambda' growth steps"},
        {"infer.coordinates", "all", "1-based list such as 1-5,8"},
        {"infer.denominator", "exact", "exact | gradient"},
        {"infer.variance", "clustered", "clustered | per-view"},
        {"infer.fdr", "false", "run the modified BH selection"},
        {"infer.fdr_alpha", "0.05", "FDR level"},
        {"pools.split_mode", "none", "none | theory"},
        {"pools.split_fraction", "0.5", "share of supervised samples reserved under theory split"},
        {"pools.wn_pool", "all", "all | supervised"},
        {"simulate.setting", "1", "1 | 2 | 3"},
        {"simulate.reps", "1", "replications"},
        {"simulate.rho", "0.1", "exchangeable correlation"},
        {"simulate.experiment", "coverage", "coverage | fdr | prediction | estimation"},
        {"simulate.coordinate", "auto", "1-based tested coordinate"},
        {"simulate.N", "auto", "override the unsupervised sample count"},
        {"predict.holdout", "0.1", "share of observed responses hidden per replication"},
    };
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool known(const std::string& key) {
    for (const KeySpec& k : config_keys())
        if (k.key == key) return true;
    return false;
}

double as_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

long long as_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

bool as_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string text;
    long line = 0;
    while (std::getline(in, text)) {
        ++line;
        const auto hash = text.find('#');
        if (hash != std::string::npos) text.erase(hash);
        if (trim(text).empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line, 1);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        const long col = static_cast<long>(text.find_first_not_of(" \t")) + 1;
        if (key.empty()) throw ParseError("missing key before '='", line, col);
        if (!known(key)) throw ParseError("unknown key '" + key + "'", line, col);
        if (out.count(key)) throw ParseError("key '" + key + "' given twice", line, col);
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::vector<Index> parse_coordinates(const std::string& text, Index p_hint) {
    const std::string key = "infer.coordinates";
    if (text == "all" || text.empty()) return {};
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        const auto dash = part.find('-');
        long long a = 0, b = 0;
        if (dash == std::string::npos) {
            a = b = as_int(key, part);
        } else {
            a = as_int(key, trim(part.substr(0, dash)));
            b = as_int(key, trim(part.substr(dash + 1)));
        }
        require(a >= 1 && b >= a, key, "ranges are 1-based and ascending, got '" + part + "'");
        if (p_hint > 0) require(b <= p_hint, key, "coordinate " + std::to_string(b) + " exceeds p");
        for (long long j = a; j <= b; ++j) out.push_back(static_cast<Index>(j - 1));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RunConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values) {
    RunConfig c;
    c.command = command;
    for (const KeySpec& k : config_keys()) c.values[k.key] = k.fallback;
    for (const auto& [k, v] : file_values) {
        if (!known(k)) throw ConfigError("unknown key '" + k + "'");
        c.values[k] = v;
    }
    for (const auto& [k, v] : flag_values) {
        if (!known(k)) throw ConfigError("unknown key '" + k + "'");
        c.values[k] = v;
    }
    auto& V = c.values;

    c.data_path = V["data.path"];
    c.csv.response = V["data.response"];
    c.csv.na = V["data.na"];
    c.csv.id = V["data.id"];
    c.csv.center = as_bool("data.center", V["data.center"]);
    require(!c.csv.response.empty(), "data.response", "must not be empty");
    c.out_dir = V["output.dir"];
    require(!c.out_dir.empty(), "output.dir", "must not be empty");

    const long long seed = as_int("run.seed", V["run.seed"]);
    require(seed >= 0, "run.seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    if (V["run.threads"].empty()) {
        c.threads = default_threads();
        V["run.threads"] = std::to_string(c.threads);
    } else {
        const long long t = as_int("run.threads", V["run.threads"]);
        require(t >= 1 && t <= 1024, "run.threads", "must be in [1, 1024]");
        c.threads = static_cast<int>(t);
    }

    PipelineOptions& po = c.pipeline;
    const std::string tau = V["impute.tau"];
    if (tau == "rate") {
        po.tau.mode = TauMode::FixedRate;
    } else if (tau == "cv") {
        po.tau.mode = TauMode::CrossValidated;
    } else {
        po.tau.mode = TauMode::Fixed;
        po.tau.value = as_double("impute.tau", tau);
        require(po.tau.value > 0.0, "impute.tau", "must be positive, 'rate' or 'cv'");
    }
    po.tau.c = as_double("impute.tau_c", V["impute.tau_c"]);
    require(po.tau.c > 0.0, "impute.tau_c", "must be positive");
    po.tau.folds = static_cast<int>(as_int("impute.cv_folds", V["impute.cv_folds"]));
    require(po.tau.folds >= 2, "impute.cv_folds", "must be at least 2");

    if (V["fit.lambda"] == "cv") {
        po.lambda_cv = true;
    } else {
        po.lambda_cv = false;
        po.lambda = as_double("fit.lambda", V["fit.lambda"]);
        require(po.lambda > 0.0, "fit.lambda", "must be positive or 'cv'");
    }
    po.cv.folds = static_cast<int>(as_int("fit.cv_folds", V["fit.cv_folds"]));
    require(po.cv.folds >= 2, "fit.cv_folds", "must be at least 2");
    const long long gp = as_int("fit.grid_points", V["fit.grid_points"]);
    require(gp >= 1 && gp <= 1000, "fit.grid_points", "must be in [1, 1000]");
    po.cv.grid_points = static_cast<int>(gp);
    po.cv.seed = c.seed;

    InferenceOptions& io = po.inference;
    io.alpha = as_double("infer.alpha", V["infer.alpha"]);
    require(io.alpha > 0.0 && io.alpha < 1.0, "infer.alpha", "must be in (0, 1)");
    if (V["infer.lambda_prime"] != "default") {
        io.lambda_prime = as_double("infer.lambda_prime", V["infer.lambda_prime"]);
        require(io.lambda_prime > 0.0, "infer.lambda_prime", "must be positive or 'default'");
    }
    io.escalation.factor = as_double("infer.escalation_factor", V["infer.escalation_factor"]);
    require(io.escalation.factor > 1.0, "infer.escalation_factor", "must exceed 1");
    io.escalation.max_escalations = static_cast<int>(as_int("infer.max_escalations", V["infer.max_escalations"]));
    require(io.escalation.max_escalations >= 0, "infer.max_escalations", "must be nonnegative");
    c.coordinates = parse_coordinates(V["infer.coordinates"]);
    const std::string den = V["infer.denominator"];
    require(den == "exact" || den == "gradient", "infer.denominator", "must be exact or gradient");
    io.denominator = den == "exact" ? DebiasDenominator::ExactRoot : DebiasDenominator::ProjectionGradient;
    const std::string var = V["infer.variance"];
    require(var == "per-view" || var == "clustered", "infer.variance", "must be per-view or clustered");
    io.variance = var == "per-view" ? VarianceForm::PerView : VarianceForm::Clustered;
    io.fdr = as_bool("infer.fdr", V["infer.fdr"]);
    io.fdr_alpha = as_double("infer.fdr_alpha", V["infer.fdr_alpha"]);
    require(io.fdr_alpha >= 0.0 && io.fdr_alpha < 1.0, "infer.fdr_alpha", "must be in [0, 1)");
    io.threads = c.threads;

    const std::string split = V["pools.split_mode"];
    require(split == "none" || split == "theory", "pools.split_mode", "must be none or theory");
    po.split = split == "none" ? SplitMode::None : SplitMode::Theory;
    po.split_fraction = as_double("pools.split_fraction", V["pools.split_fraction"]);
    require(po.split_fraction > 0.0 && po.split_fraction < 1.0, "pools.split_fraction", "must be in (0, 1)");
    const std::string wn = V["pools.wn_pool"];
    require(wn == "all" || wn == "supervised", "pools.wn_pool", "must be all or supervised");
    po.wn_pool = wn == "all" ? WnPool::Projection : WnPool::Inference;

    const long long st = as_int("simulate.setting", V["simulate.setting"]);
    require(st >= 1 && st <= 3, "simulate.setting", "must be 1, 2 or 3");
    c.setting = static_cast<int>(st);
    c.rho = as_double("simulate.rho", V["simulate.rho"]);
    c.reps = static_cast<Index>(as_int("simulate.reps", V["simulate.reps"]));
    require(c.reps >= 1, "simulate.reps", "must be at least 1");
    c.experiment = V["simulate.experiment"];
    require(c.experiment == "coverage" || c.experiment == "fdr" || c.experiment == "prediction" ||
                c.experiment == "estimation",
            "simulate.experiment", "must be coverage, fdr, prediction or estimation");
    if (V["simulate.coordinate"] != "auto") {
        const long long j = as_int("simulate.coordinate", V["simulate.coordinate"]);
        require(j >= 1, "simulate.coordinate", "is 1-based");
        c.sim_coordinate = static_cast<Index>(j - 1);
    }
    if (V["simulate.N"] != "auto") {
        const long long N = as_int("simulate.N", V["simulate.N"]);
        require(N >= 0, "simulate.N", "must be nonnegative");
        c.sim_N = static_cast<Index>(N);
    }
    c.holdout = as_double("predict.holdout", V["predict.holdout"]);
    require(c.holdout > 0.0 && c.holdout < 1.0, "predict.holdout", "must be in (0, 1)");
    return c;
}

}  // namespace blockinfer::cli
