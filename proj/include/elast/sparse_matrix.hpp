#pragma once

#include "elast/linear_operator.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace elast {

struct BcConstraint;

/// Square compressed-sparse-row matrix with sorted column indices per row.
class SparseMatrix : public LinearOperator {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> cols,
               std::vector<double> values);

  std::size_t size() const override { return n_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  void add_mult(std::span<const double> x, std::span<double> y) const override;
  double entry(std::size_t row, std::size_t col) const;
  std::vector<double> diagonal() const;

  /// Row offsets (int64), column indices (int32) and values.
  std::size_t storage_bytes() const;

private:
  std::size_t n_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> values_;
};

/// y = A x; throws InvalidArgument on a length mismatch.
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

/// Z A Z + (I - Z): constrained rows and columns replaced by identity ones.
SparseMatrix constrain_matrix(const SparseMatrix& a, const BcConstraint& bc);

} // namespace elast
