#include "attnplan/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace attnplan {

SparseMatrix SparseMatrix::from_rows(std::vector<std::vector<std::pair<int, double>>> rows, int cols) {
    SparseMatrix m(static_cast<int>(rows.size()), cols);
    std::size_t total = 0;
    for (const auto& row : rows) total += row.size();
    m.cols_.reserve(total);
    m.vals_.reserve(total);
    for (int r = 0; r < m.n_rows_; ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [col, val] : row) {
            if (col < 0 || col >= cols)
                throw std::out_of_range("sparse row entry out of range");
            const bool merge = m.cols_.size() > m.row_start_[r] && m.cols_.back() == col;
            if (merge) {
                m.vals_.back() += val;
            } else {
                m.cols_.push_back(col);
                m.vals_.push_back(val);
            }
        }
        m.row_start_[r + 1] = m.cols_.size();
    }
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    SparseMatrix m(n, n);
    m.cols_.resize(n);
    m.vals_.assign(n, 1.0);
    for (int i = 0; i < n; ++i) {
        m.cols_[i] = i;
        m.row_start_[i + 1] = static_cast<std::size_t>(i) + 1;
    }
    return m;
}

double SparseMatrix::row_sum(int r) const {
    double s = 0.0;
    for (double v : row_values(r)) s += v;
    return s;
}

std::vector<double> SparseMatrix::apply(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != n_cols_)
        throw std::invalid_argument("vector size does not match matrix columns");
    std::vector<double> out(n_rows_, 0.0);
    for (int r = 0; r < n_rows_; ++r) {
        double acc = 0.0;
        for (std::size_t i = row_start_[r]; i < row_start_[r + 1]; ++i)
            acc += vals_[i] * v[cols_[i]];
        out[r] = acc;
    }
    return out;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& rhs) const {
    if (n_cols_ != rhs.n_rows_)
        throw std::invalid_argument("matrix dimensions do not match");
    SparseMatrix out(n_rows_, rhs.n_cols_);
    std::vector<double> acc(rhs.n_cols_, 0.0);
    std::vector<int> touched;
    for (int r = 0; r < n_rows_; ++r) {
        touched.clear();
        for (std::size_t i = row_start_[r]; i < row_start_[r + 1]; ++i) {
            const int mid = cols_[i];
            const double w = vals_[i];
            for (std::size_t j = rhs.row_start_[mid]; j < rhs.row_start_[mid + 1]; ++j) {
                const int c = rhs.cols_[j];
                if (acc[c] == 0.0) touched.push_back(c);
                acc[c] += w * rhs.vals_[j];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int c : touched) {
            if (acc[c] != 0.0) {
                out.cols_.push_back(c);
                out.vals_.push_back(acc[c]);
            }
            acc[c] = 0.0;
        }
        out.row_start_[r + 1] = out.cols_.size();
    }
    return out;
}

} // namespace attnplan
