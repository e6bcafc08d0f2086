#include "doctest.h"

#include "blockinfer/cli/commands.hpp"
#include "blockinfer/cli/config.hpp"
#include "blockinfer/cli/csv_io.hpp"
#include "blockinfer/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace blockinfer;
using namespace blockinfer::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("blockinfer_test_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Three sources of 4, four groups, 25 supervised + 15 unsupervised each.
fs::path toy_csv(const fs::path& dir) {
    SettingConfig c;
    c.name = "toy";
    c.n = 100;
    c.N = 60;
    c.p_src = {4, 4, 4};
    c.q_src = {2, 1, 1};
    c.beta_s = 1.0;
    c.n_r = {25, 25, 25, 25};
    c.missing_source = {-1, 2, 1, 0};
    const SimulatedData s = generate(c, 11);
    const fs::path p = dir / "toy.csv";
    std::ofstream out(p);
    write_dataset(out, s.data);
    return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "blockinfer");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("csv reading: missing markers, unsupervised rows, errors") {
    std::istringstream ok("id,a,b,y\nr1,1,2,3\nr2,NA,5,\nr3,7,8,NA\n");
    CsvOptions opt;
    opt.id = "id";
    const SemiSupervisedDataset d = read_dataset(ok, opt);
    CHECK(d.n_samples() == 3);
    CHECK(d.n_covariates() == 2);
    CHECK(d.missing(1, 0));
    CHECK_FALSE(d.missing(1, 1));
    CHECK(d.y_observed == std::vector<bool>{true, false, false});

    std::istringstream bad("a,b,y\n1,2,3\n4,x,6\n");
    try {
        read_dataset(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 2);
    }
    std::istringstream ragged("a,b,y\n1,2,3\n4,5\n");
    try {
        read_dataset(ragged);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream noy("a,b\n1,2\n");
    CHECK_THROWS_AS(read_dataset(noy), ParseError);
    CHECK(split_record("\"a,b\",\"c\"\"d\",e", 1) == std::vector<std::string>{"a,b", "c\"d", "e"});
}

TEST_CASE("csv round trip is exact") {
    std::istringstream in("a,b,y\n0.1,NA,1e-300\n-2.5,3.141592653589793,\n");
    const SemiSupervisedDataset d = read_dataset(in);
    std::ostringstream out;
    write_dataset(out, d);
    std::istringstream again(out.str());
    const SemiSupervisedDataset e = read_dataset(again);
    CHECK(e.missing == d.missing);
    CHECK(e.y_observed == d.y_observed);
    CHECK(e.X(1, 1) == d.X(1, 1));
    CHECK(e.y(0) == d.y(0));
    CHECK(format_double(kNaN) == "NA");
}

TEST_CASE("config parsing and precedence") {
    std::istringstream in("# comment\ninfer.alpha = 0.1\n\nfit.lambda=0.4\n");
    const auto v = parse_config(in);
    CHECK(v.at("infer.alpha") == "0.1");
    std::istringstream unk("infer.alpha = 0.1\nbogus.key = 3\n");
    try {
        parse_config(unk);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream dup("infer.alpha = 0.1\ninfer.alpha = 0.2\n");
    CHECK_THROWS_AS(parse_config(dup), ParseError);

    const RunConfig c = resolve_config("infer", v, {{"infer.alpha", "0.2"}, {"data.path", "x.csv"}});
    CHECK(c.pipeline.inference.alpha == 0.2);
    CHECK_FALSE(c.pipeline.lambda_cv);
    CHECK(c.pipeline.lambda == 0.4);
    CHECK_THROWS_AS(resolve_config("infer", {{"infer.alpha", "2"}}, {{"data.path", "x.csv"}}), ConfigError);
    CHECK(parse_coordinates("1-3,7") == std::vector<Index>{0, 1, 2, 6});
    CHECK(parse_coordinates("all").empty());
    CHECK_THROWS_AS(parse_coordinates("0"), ConfigError);
    CHECK_THROWS_AS(parse_coordinates("3-1"), ConfigError);
}

TEST_CASE("fit, impute and infer end to end") {
    const fs::path dir = scratch("e2e");
    const std::string data = toy_csv(dir).string();

    CHECK(run({"impute", "--data", data, "--out", (dir / "imp").string()}) == 0);
    CHECK(fs::exists(dir / "imp" / "imputation.json"));
    CHECK(fs::exists(dir / "imp" / "imputed_views.csv"));

    CHECK(run({"fit", "--data", data, "--out", (dir / "fit").string(), "--seed", "3"}) == 0);
    const auto fit = nlohmann::json::parse(slurp(dir / "fit" / "fit.json"));
    CHECK(fit.contains("provenance"));

    const std::string a05 = (dir / "a05").string(), a10 = (dir / "a10").string();
    CHECK(run({"infer", "--data", data, "--out", a05, "--coords", "1-5", "--lambda", "1.0"}) == 0);
    CHECK(run({"infer", "--data", data, "--out", a10, "--coords", "1-5", "--lambda", "1.0", "--alpha", "0.1"}) == 0);
    const auto r05 = nlohmann::json::parse(slurp(fs::path(a05) / "inference.json"));
    const auto r10 = nlohmann::json::parse(slurp(fs::path(a10) / "inference.json"));
    REQUIRE(r05["records"].size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& x = r05["records"][k];
        const auto& y = r10["records"][k];
        CHECK(x["index"] == k + 1);
        CHECK(x["status"] == "ok");
        const double w05 = x["ci_upper"].get<double>() - x["ci_lower"].get<double>();
        const double w10 = y["ci_upper"].get<double>() - y["ci_lower"].get<double>();
        CHECK(w10 < w05);
        CHECK(x["beta_tilde"] == y["beta_tilde"]);
    }
    const std::string csv = slurp(fs::path(a05) / "inference.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("simulate output is byte-identical across runs and thread counts") {
    const fs::path dir = scratch("sim");
    std::vector<std::string> base = {"simulate", "--setting", "1", "--reps", "2", "--seed", "5"};
    auto with = [&](const std::string& out, const std::string& threads) {
        auto a = base;
        a.insert(a.end(), {"--out", (dir / out).string(), "--threads", threads});
        return a;
    };
    REQUIRE(run(with("a", "1")) == 0);
    const std::string json1 = slurp(dir / "a" / "simulation.json"), csv1 = slurp(dir / "a" / "replications.csv");
    REQUIRE(run(with("a", "1")) == 0);
    CHECK(!csv1.empty());
    CHECK(json1 == slurp(dir / "a" / "simulation.json"));
    CHECK(csv1 == slurp(dir / "a" / "replications.csv"));
    // Another worker count changes only the echoed configuration.
    REQUIRE(run(with("c", "2")) == 0);
    CHECK(csv1 == slurp(dir / "c" / "replications.csv"));
    CHECK(nlohmann::json::parse(json1)["result"] == nlohmann::json::parse(slurp(dir / "c" / "simulation.json"))["result"]);
    CHECK(fs::exists(dir / "a" / "timing.json"));
}

TEST_CASE("exit codes and error messages") {
    const fs::path dir = scratch("errors");
    std::string out, err;
    CHECK(run({"fit", "--data", (dir / "missing.csv").string(), "--out", dir.string()}, &out, &err) == 1);
    CHECK(err.find("error") != std::string::npos);

    std::ofstream(dir / "bad.csv") << "a,b,y\n1,2,3\n4,oops,6\n";
    CHECK(run({"fit", "--data", (dir / "bad.csv").string(), "--out", dir.string()}, &out, &err) == 1);
    CHECK(err.find("line 3") != std::string::npos);

    std::ofstream(dir / "bad.cfg") << "infer.alpha = 0.1\nnot.a.key = 1\n";
    CHECK(run({"infer", "--config", (dir / "bad.cfg").string()}, &out, &err) == 1);
    CHECK(err.find("line 2") != std::string::npos);

    CHECK(run({"nonsense"}, &out, &err) != 0);
}
