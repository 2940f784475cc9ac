#include "elast/geometry.hpp"

#include "elast/errors.hpp"

#include <sstream>

namespace elast {

PointGeometry hex_point_geometry(const std::array<std::array<double, 3>, 8>& corners,
                                 const std::array<double, 3>& xi) {
  PointGeometry g;
  for (int v = 0; v < 8; ++v) {
    const int bits[3] = {v & 1, (v >> 1) & 1, (v >> 2) & 1};
    double n[3], dn[3];
    for (int a = 0; a < 3; ++a) {
      n[a] = bits[a] ? xi[a] : 1.0 - xi[a];
      dn[a] = bits[a] ? 1.0 : -1.0;
    }
    const double grad[3] = {dn[0] * n[1] * n[2], n[0] * dn[1] * n[2], n[0] * n[1] * dn[2]};
    for (int i = 0; i < 3; ++i) {
      for (int a = 0; a < 3; ++a) g.J[3 * i + a] += corners[v][i] * grad[a];
    }
  }
  const auto& J = g.J;
  // Cofactor matrix equals det * J^{-T}.
  std::array<double, 9> cof{};
  cof[0] = J[4] * J[8] - J[5] * J[7];
  cof[1] = J[5] * J[6] - J[3] * J[8];
  cof[2] = J[3] * J[7] - J[4] * J[6];
  cof[3] = J[2] * J[7] - J[1] * J[8];
  cof[4] = J[0] * J[8] - J[2] * J[6];
  cof[5] = J[1] * J[6] - J[0] * J[7];
  cof[6] = J[1] * J[5] - J[2] * J[4];
  cof[7] = J[2] * J[3] - J[0] * J[5];
  cof[8] = J[0] * J[4] - J[1] * J[3];
  g.detJ = J[0] * cof[0] + J[1] * cof[1] + J[2] * cof[2];
  if (!(g.detJ > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate element Jacobian (det J = " << g.detJ << ")";
    throw GeometryError(msg.str());
  }
  for (int k = 0; k < 9; ++k) g.JinvT[k] = cof[k] / g.detJ;
  return g;
}

GeometryFactors::GeometryFactors(std::size_t num_elements, int q1d)
    : num_elements_(num_elements), q1d_(q1d),
      data_(num_elements * std::size_t(q1d * q1d * q1d) * kValuesPerPoint, 0.0) {}

void GeometryFactors::set(std::size_t e, int qp, const PointGeometry& g) {
  double* p = data_.data() + (e * std::size_t(points_per_element()) + qp) * kValuesPerPoint;
  std::copy(g.J.begin(), g.J.end(), p);
  p[9] = g.detJ;
  std::copy(g.JinvT.begin(), g.JinvT.end(), p + 10);
}

GeometryFactors compute_geometry_factors(const FESpace& space, const QuadRule1D& rule) {
  const int q = rule.size();
  if (q < 1) throw InvalidArgument("empty quadrature rule");
  const auto& mesh = space.mesh();
  GeometryFactors geom(space.num_elements(), q);
  std::vector<double> w(std::size_t(q) * q * q);
  for (int k = 0; k < q; ++k) {
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < q; ++i) {
        w[(k * q + j) * q + i] = rule.weights[i] * rule.weights[j] * rule.weights[k];
      }
    }
  }
  geom.set_weights(std::move(w));
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto corners = mesh.cell_corners(e);
    for (int k = 0; k < q; ++k) {
      for (int j = 0; j < q; ++j) {
        for (int i = 0; i < q; ++i) {
          const std::array<double, 3> xi = {rule.points[i], rule.points[j], rule.points[k]};
          geom.set(e, (k * q + j) * q + i, hex_point_geometry(corners, xi));
        }
      }
    }
  }
  return geom;
}

} // namespace elast
