#pragma once

#include <span>
#include <vector>

namespace elast {

/// Quadrature rule on the reference interval [0,1].
struct QuadRule1D {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return int(points.size()); }
};

/// Gauss-Legendre rule with q points mapped to [0,1]; exact to degree 2q-1.
QuadRule1D gauss_legendre_rule(int q);

/// The p+1 Gauss-Lobatto points on [0,1], endpoints included.
std::vector<double> gauss_lobatto_nodes(int p);

/// Values of all Lagrange cardinal polynomials on `nodes` at x (barycentric form).
std::vector<double> lagrange_values(std::span<const double> nodes, double x);

/// First derivatives of all Lagrange cardinal polynomials on `nodes` at x.
std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x);

/// 1D interpolation (B) and differentiation (D) tables of the nodal Lagrange
/// basis on Gauss-Lobatto nodes, evaluated at the points of a quadrature rule.
/// Both tables are stored row-major as q x (p+1): entry (iq, a) at iq*(p+1)+a.
struct Basis1D {
  int order = 0;
  std::vector<double> nodes;
  QuadRule1D rule;
  std::vector<double> B;
  std::vector<double> D;

  int num_dofs() const { return order + 1; }
  int num_qpts() const { return rule.size(); }
  double b(int iq, int a) const { return B[iq * (order + 1) + a]; }
  double d(int iq, int a) const { return D[iq * (order + 1) + a]; }
};

Basis1D eval_basis_matrices(int p, const QuadRule1D& rule);

} // namespace elast
