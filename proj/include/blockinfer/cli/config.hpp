#pragma once

#include "blockinfer/cli/csv_io.hpp"
#include "blockinfer/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockinfer::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct KeySpec {
    std::string key;
    std::string fallback;  // default value as text
    std::string help;
};

/// Every recognised configuration key with its default.
const std::vector<KeySpec>& config_keys();

/// `key = value` lines; `#` starts a comment; blank lines ignored. Unknown
/// keys and malformed lines throw ParseError with line and column.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> values;  // fully resolved, for the provenance echo

    CsvOptions csv;
    std::string data_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<Index> coordinates;  // 0-based; empty means every covariate
    PipelineOptions pipeline;

    int setting = 1;
    double rho = 0.1;
    Index reps = 1;
    std::string experiment;
    std::optional<Index> sim_coordinate;  // 0-based
    std::optional<Index> sim_N;
    double holdout = 0.1;
};

/// Defaults, then file values, then flags. Threads fall back to
/// BLOCKINFER_THREADS and then the hardware count. Throws ConfigError.
RunConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values);

/// "1-5,8" -> {0,1,2,3,4,7}; "all" -> empty. Throws ConfigError.
std::vector<Index> parse_coordinates(const std::string& text, Index p_hint = -1);

}  // namespace blockinfer::cli
