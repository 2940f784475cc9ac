#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

namespace elast {

/// Square linear map with accumulating application y += A x.
class LinearOperator {
public:
  virtual ~LinearOperator() = default;

  virtual std::size_t size() const = 0;
  virtual void add_mult(std::span<const double> x, std::span<double> y) const = 0;

  /// y = A x.
  void mult(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    add_mult(x, y);
  }
};

} // namespace elast
