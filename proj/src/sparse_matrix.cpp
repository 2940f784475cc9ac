#include "elast/sparse_matrix.hpp"

#include "elast/errors.hpp"
#include "elast/space.hpp"

#include <algorithm>

namespace elast {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::int64_t> row_ptr,
                           std::vector<std::int32_t> cols, std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (row_ptr_.size() != n_ + 1 || cols_.size() != values_.size() ||
      std::size_t(row_ptr_.back()) != cols_.size()) {
    throw InvalidArgument("inconsistent CSR arrays");
  }
}

void SparseMatrix::add_mult(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw InvalidArgument("spmv: dimension mismatch");
  const auto n = std::int64_t(n_);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[cols_[k]];
    y[r] += acc;
  }
}

double SparseMatrix::entry(std::size_t row, std::size_t col) const {
  const auto begin = cols_.begin() + row_ptr_[row];
  const auto end = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, std::int32_t(col));
  if (it == end || *it != std::int32_t(col)) return 0.0;
  return values_[it - cols_.begin()];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t r = 0; r < n_; ++r) d[r] = entry(r, r);
  return d;
}

std::size_t SparseMatrix::storage_bytes() const {
  return 8 * row_ptr_.size() + 4 * cols_.size() + 8 * values_.size();
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.size() || y.size() != a.size()) {
    throw InvalidArgument("spmv: dimension mismatch");
  }
  a.mult(x, y);
}

SparseMatrix constrain_matrix(const SparseMatrix& a, const BcConstraint& bc) {
  const std::size_t n = a.size();
  std::vector<char> fixed(n, 0);
  for (auto d : bc.dofs) fixed[d] = 1;
  std::vector<std::int64_t> rp(n + 1, 0);
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  cols.reserve(a.nnz());
  vals.reserve(a.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    if (fixed[r]) {
      cols.push_back(std::int32_t(r));
      vals.push_back(1.0);
    } else {
      for (auto k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
        if (fixed[a.cols()[k]]) continue;
        cols.push_back(a.cols()[k]);
        vals.push_back(a.values()[k]);
      }
    }
    rp[r + 1] = std::int64_t(cols.size());
  }
  return SparseMatrix(n, std::move(rp), std::move(cols), std::move(vals));
}

} // namespace elast
