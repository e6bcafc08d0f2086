#pragma once

#include "blockinfer/cli/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace blockinfer::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 error, 2 finished but some coordinate or
/// replication failed (details in the report).
struct CommandOutcome {
    int exit_code = 0;
    std::vector<std::string> files;
    std::string summary;
};

/// Writes to `path + ".tmp"` then renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

nlohmann::ordered_json provenance(const RunConfig& config);

CommandOutcome cmd_impute(const RunConfig& config);
CommandOutcome cmd_fit(const RunConfig& config);
CommandOutcome cmd_infer(const RunConfig& config);
CommandOutcome cmd_simulate(const RunConfig& config);
CommandOutcome cmd_predict(const RunConfig& config);

/// Full command line: `<prog> <subcommand> [flags]`. Returns the exit code;
/// messages go to `out` / `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blockinfer::cli
