#include "blockinfer/common.hpp"

#include <algorithm>
#include <iterator>

namespace blockinfer {

Matrix gather(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
    return m(rows, cols);
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
    return m(rows, Eigen::all);
}

Matrix gather_cols(const Matrix& m, const std::vector<Index>& cols) {
    return m(Eigen::all, cols);
}

Vector gather(const Vector& v, const std::vector<Index>& idx) {
    return v(idx);
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_subset(const IndexSet& a, const IndexSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace blockinfer
