#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockinfer {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Sorted, duplicate-free list of covariate indices.
using IndexSet = std::vector<Index>;
/// Sorted, duplicate-free list of sample (row) indices.
using SampleSet = std::vector<Index>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationFailure : public Error {
public:
    using Error::Error;
};

class EmptySourceSet : public Error {
public:
    using Error::Error;
};

class NeverObservedCovariate : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class EmptyGroupInPool : public Error {
public:
    using Error::Error;
};

class DegenerateFolds : public Error {
public:
    using Error::Error;
};

class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

class DegenerateVariance : public Error {
public:
    using Error::Error;
};

class QuotaMismatch : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// The constraint set of an LP/QP is empty. `attained` carries the smallest
/// achievable constraint radius when the solver computed it, NaN otherwise.
class Infeasible : public Error {
public:
    Infeasible(const std::string& what, double attained = kNaN)
        : Error(what), attained_(attained) {}
    double attained() const noexcept { return attained_; }

private:
    double attained_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line, long column)
        : Error(what), line_(line), column_(column) {}
    long line() const noexcept { return line_; }
    long column() const noexcept { return column_; }

private:
    long line_;
    long column_;
};

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Rows `rows` and columns `cols` of `m` as a dense copy.
Matrix gather(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols);
Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows);
Matrix gather_cols(const Matrix& m, const std::vector<Index>& cols);
Vector gather(const Vector& v, const std::vector<Index>& idx);

IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
bool is_subset(const IndexSet& a, const IndexSet& b);

}  // namespace blockinfer
