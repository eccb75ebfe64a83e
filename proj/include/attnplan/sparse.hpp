#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace attnplan {

/// Compressed sparse row matrix holding transition probabilities or kernels.
/// Column indices within a row are kept sorted and unique.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : n_rows_(rows), n_cols_(cols), row_start_(rows + 1, 0) {}

    /// Builds a matrix from per-row (column, value) entries. Entries may be
    /// unsorted and may repeat a column; repeats are summed.
    static SparseMatrix from_rows(std::vector<std::vector<std::pair<int, double>>> rows, int cols);

    /// Identity matrix of the given size.
    static SparseMatrix identity(int n);

    int rows() const { return n_rows_; }
    int cols() const { return n_cols_; }
    std::size_t nonzeros() const { return cols_.size(); }

    std::span<const int> row_indices(int r) const {
        return {cols_.data() + row_start_[r], cols_.data() + row_start_[r + 1]};
    }
    std::span<const double> row_values(int r) const {
        return {vals_.data() + row_start_[r], vals_.data() + row_start_[r + 1]};
    }

    double row_sum(int r) const;

    /// y = M v
    std::vector<double> apply(const std::vector<double>& v) const;

    /// Row-major product: result = (*this) * rhs.
    SparseMatrix multiply(const SparseMatrix& rhs) const;

private:
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<int> cols_;
    std::vector<double> vals_;
};

} // namespace attnplan
