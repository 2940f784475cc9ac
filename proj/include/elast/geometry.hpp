#pragma once

#include "elast/basis.hpp"
#include "elast/space.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace elast {

/// Jacobian data at one point of a hexahedron.
struct PointGeometry {
  std::array<double, 9> J{};     ///< J[i*3+a] = dx_i / dxi_a
  double detJ = 0.0;
  std::array<double, 9> JinvT{}; ///< inverse transpose, same layout
};

/// Trilinear map of a hexahedron with lexicographic corners evaluated at a
/// reference point in [0,1]^3. Throws GeometryError if det J <= 0.
PointGeometry hex_point_geometry(const std::array<std::array<double, 3>, 8>& corners,
                                 const std::array<double, 3>& xi);

/// Per element and quadrature point: J, det J and J^{-T}, plus the tensor
/// quadrature weights. Quadrature points are lexicographic with x fastest.
class GeometryFactors {
public:
  static constexpr int kValuesPerPoint = 19;

  GeometryFactors() = default;
  GeometryFactors(std::size_t num_elements, int q1d);

  std::size_t num_elements() const { return num_elements_; }
  int q1d() const { return q1d_; }
  int points_per_element() const { return q1d_ * q1d_ * q1d_; }

  const double* J(std::size_t e, int qp) const { return at(e, qp); }
  double detJ(std::size_t e, int qp) const { return at(e, qp)[9]; }
  const double* JinvT(std::size_t e, int qp) const { return at(e, qp) + 10; }
  double weight(int qp) const { return weights_[qp]; }
  const std::vector<double>& weights() const { return weights_; }

  void set(std::size_t e, int qp, const PointGeometry& g);
  void set_weights(std::vector<double> w) { weights_ = std::move(w); }

  std::size_t storage_bytes() const { return 8 * (data_.size() + weights_.size()); }

private:
  const double* at(std::size_t e, int qp) const {
    return data_.data() + (e * std::size_t(points_per_element()) + qp) * kValuesPerPoint;
  }

  std::size_t num_elements_ = 0;
  int q1d_ = 0;
  std::vector<double> data_;
  std::vector<double> weights_;
};

GeometryFactors compute_geometry_factors(const FESpace& space, const QuadRule1D& rule);

} // namespace elast
