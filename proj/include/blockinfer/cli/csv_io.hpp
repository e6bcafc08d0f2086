#pragma once

#include "blockinfer/core_data.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace blockinfer::cli {

struct CsvOptions {
    std::string response = "y";
    std::string na = "NA";
    std::string id;       // optional sample-id column; row numbers otherwise
    bool center = false;  // subtract observed column means (and the supervised mean of y)
};

/// Splits one CSV record; double-quoted fields may contain commas and "".
/// `line` is only used for error messages.
std::vector<std::string> split_record(const std::string& text, long line);

/// Header row, then one row per sample. Covariate cells equal to the NA
/// marker are missing; a blank or NA response marks an unsupervised row.
/// Throws ParseError with 1-based line and column.
SemiSupervisedDataset read_dataset(std::istream& in, const CsvOptions& options = {});
SemiSupervisedDataset read_dataset_file(const std::string& path, const CsvOptions& options = {});

/// Inverse of read_dataset (NaN-free for observed cells).
void write_dataset(std::ostream& out, const SemiSupervisedDataset& data, const CsvOptions& options = {});

/// 17 significant digits; NaN prints as NA.
std::string format_double(double v);

}  // namespace blockinfer::cli
