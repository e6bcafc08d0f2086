#include "blockinfer/cli/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace blockinfer::cli {

std::vector<std::string> split_record(const std::string& text, long line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty() || was_quoted)
                throw ParseError("stray quote inside an unquoted field", line, static_cast<long>(out.size()) + 1);
            quoted = was_quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += ch;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line, static_cast<long>(out.size()) + 1);
    out.push_back(std::move(cur));
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && ptr == e && std::isfinite(v);
}

}  // namespace

SemiSupervisedDataset read_dataset(std::istream& in, const CsvOptions& opt) {
    std::string text;
    long line = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, text)) {
        ++line;
        if (!trim(text).empty()) header = split_record(text, line);
    }
    if (header.empty()) throw ParseError("empty input: no header row", line, 1);
    for (auto& h : header) h = trim(h);

    long y_col = -1, id_col = -1;
    std::vector<long> cov_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == opt.response) {
            if (y_col >= 0) throw ParseError("response column '" + opt.response + "' appears twice", 1, static_cast<long>(c) + 1);
            y_col = static_cast<long>(c);
        } else if (!opt.id.empty() && header[c] == opt.id) {
            id_col = static_cast<long>(c);
        } else {
            cov_cols.push_back(static_cast<long>(c));
        }
    }
    if (y_col < 0) throw ParseError("no response column named '" + opt.response + "'", line, 1);
    if (!opt.id.empty() && id_col < 0) throw ParseError("no id column named '" + opt.id + "'", line, 1);
    if (cov_cols.empty()) throw ParseError("no covariate columns", line, 1);

    std::vector<std::vector<double>> xs;
    std::vector<std::vector<bool>> miss;
    std::vector<double> ys;
    std::vector<bool> obs;
    SemiSupervisedDataset d;
    while (std::getline(in, text)) {
        ++line;
        if (trim(text).empty()) continue;
        std::vector<std::string> f = split_record(text, line);
        if (f.size() != header.size()) {
            std::ostringstream os;
            os << "row at line " << line << " has " << f.size() << " fields, header has " << header.size();
            throw ParseError(os.str(), line, static_cast<long>(std::min(f.size(), header.size())) + 1);
        }
        std::vector<double> row(cov_cols.size());
        std::vector<bool> mrow(cov_cols.size(), false);
        for (std::size_t a = 0; a < cov_cols.size(); ++a) {
            const std::string cell = trim(f[static_cast<std::size_t>(cov_cols[a])]);
            if (cell == opt.na) {
                mrow[a] = true;
                row[a] = kNaN;
            } else if (!parse_number(cell, row[a])) {
                throw ParseError("covariate '" + header[static_cast<std::size_t>(cov_cols[a])] + "' value '" + cell +
                                     "' is neither a finite number nor the missing marker",
                                 line, cov_cols[a] + 1);
            }
        }
        const std::string yc = trim(f[static_cast<std::size_t>(y_col)]);
        double yv = kNaN;
        const bool yo = !(yc.empty() || yc == opt.na);
        if (yo && !parse_number(yc, yv))
            throw ParseError("response value '" + yc + "' is not a finite number", line, y_col + 1);
        xs.push_back(std::move(row));
        miss.push_back(std::move(mrow));
        ys.push_back(yv);
        obs.push_back(yo);
        d.sample_ids.push_back(id_col >= 0 ? trim(f[static_cast<std::size_t>(id_col)]) : std::to_string(xs.size()));
    }
    if (xs.empty()) throw ParseError("no data rows", line, 1);

    const Index n = static_cast<Index>(xs.size()), p = static_cast<Index>(cov_cols.size());
    d.X.resize(n, p);
    d.missing.resize(n, p);
    d.y.resize(n);
    d.y_observed = obs;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            d.X(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            d.missing(i, j) = miss[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        d.y(i) = ys[static_cast<std::size_t>(i)];
    }
    for (long c : cov_cols) d.covariate_names.push_back(header[static_cast<std::size_t>(c)]);

    if (opt.center) {
        for (Index j = 0; j < p; ++j) {
            double s = 0.0;
            Index m = 0;
            for (Index i = 0; i < n; ++i)
                if (!d.missing(i, j)) {
                    s += d.X(i, j);
                    ++m;
                }
            if (m == 0) continue;
            for (Index i = 0; i < n; ++i)
                if (!d.missing(i, j)) d.X(i, j) -= s / static_cast<double>(m);
        }
        double s = 0.0;
        Index m = 0;
        for (Index i = 0; i < n; ++i)
            if (d.y_observed[static_cast<std::size_t>(i)]) {
                s += d.y(i);
                ++m;
            }
        for (Index i = 0; i < n; ++i)
            if (d.y_observed[static_cast<std::size_t>(i)]) d.y(i) -= s / static_cast<double>(m);
    }
    return d;
}

SemiSupervisedDataset read_dataset_file(const std::string& path, const CsvOptions& opt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path + "'");
    return read_dataset(in, opt);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_dataset(std::ostream& out, const SemiSupervisedDataset& d, const CsvOptions& opt) {
    const bool ids = !opt.id.empty();
    if (ids) out << opt.id << ',';
    for (Index j = 0; j < d.n_covariates(); ++j) out << d.covariate_names[static_cast<std::size_t>(j)] << ',';
    out << opt.response << '\n';
    for (Index i = 0; i < d.n_samples(); ++i) {
        if (ids) out << d.sample_ids[static_cast<std::size_t>(i)] << ',';
        for (Index j = 0; j < d.n_covariates(); ++j)
            out << (d.missing(i, j) ? opt.na : format_double(d.X(i, j))) << ',';
        out << (d.y_observed[static_cast<std::size_t>(i)] ? format_double(d.y(i)) : opt.na) << '\n';
    }
}

}  // namespace blockinfer::cli
