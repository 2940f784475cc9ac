#include "elast/basis.hpp"

#include "elast/errors.hpp"

#include <cmath>
#include <numbers>

namespace elast {

namespace {

struct LegendreEval {
  double value;
  double derivative;
};

// Three-term recurrence for P_n and P_n' on [-1,1]; x must be interior for the
// derivative formula.
LegendreEval legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

constexpr double kSnapTol = 1e-14;

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) w[j] *= nodes[j] - nodes[k];
    }
    w[j] = 1.0 / w[j];
  }
  return w;
}

int coincident_node(std::span<const double> nodes, double x) {
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (std::abs(x - nodes[j]) < kSnapTol) return int(j);
  }
  return -1;
}

} // namespace

QuadRule1D gauss_legendre_rule(int q) {
  if (q < 1) throw InvalidArgument("quadrature order must be at least 1");
  std::vector<double> x(q), w(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double xi = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [val, der] = legendre(q, xi);
      const double dx = val / der;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double der = legendre(q, xi).derivative;
    const double wi = 2.0 / ((1.0 - xi * xi) * der * der);
    // xi is positive and descending in i; fill symmetric pairs.
    x[q - 1 - i] = xi;
    x[i] = -xi;
    w[q - 1 - i] = wi;
    w[i] = wi;
  }
  if (q % 2 == 1) x[q / 2] = 0.0;
  QuadRule1D rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    rule.points[i] = 0.5 * (1.0 + x[i]);
    rule.weights[i] = 0.5 * w[i];
  }
  return rule;
}

std::vector<double> gauss_lobatto_nodes(int p) {
  if (p < 1) throw InvalidArgument("polynomial order must be at least 1");
  std::vector<double> x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  // Interior nodes are the roots of P_p'. Newton on P_p' with P_p'' from the
  // Legendre ODE (1-x^2) P'' = 2x P' - p(p+1) P.
  for (int i = 1; i <= p / 2; ++i) {
    double xi = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      const auto [val, der] = legendre(p, xi);
      const double der2 = (2.0 * xi * der - p * (p + 1.0) * val) / (1.0 - xi * xi);
      const double dx = der / der2;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    x[i] = xi;
    x[p - i] = -xi;
  }
  if (p % 2 == 0) x[p / 2] = 0.0;
  std::vector<double> nodes(p + 1);
  for (int i = 0; i <= p; ++i) nodes[i] = 0.5 * (1.0 + x[i]);
  nodes[0] = 0.0;
  nodes[p] = 1.0;
  return nodes;
}

std::vector<double> lagrange_values(std::span<const double> nodes, double x) {
  const std::size_t n = nodes.size();
  std::vector<double> out(n, 0.0);
  if (const int m = coincident_node(nodes, x); m >= 0) {
    out[m] = 1.0;
    return out;
  }
  const auto w = barycentric_weights(nodes);
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = w[j] / (x - nodes[j]);
    denom += out[j];
  }
  for (auto& v : out) v /= denom;
  return out;
}

std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x) {
  const std::size_t n = nodes.size();
  std::vector<double> out(n, 0.0);
  const auto w = barycentric_weights(nodes);
  if (const int m = coincident_node(nodes, x); m >= 0) {
    // Rows of the barycentric differentiation matrix.
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (int(j) == m) continue;
      out[j] = (w[j] / w[m]) / (nodes[m] - nodes[j]);
      diag -= out[j];
    }
    out[m] = diag;
    return out;
  }
  // l_j'(x) = l_j(x) * sum_{k != j} 1/(x - x_k)
  const auto vals = lagrange_values(nodes, x);
  double s_all = 0.0;
  for (std::size_t k = 0; k < n; ++k) s_all += 1.0 / (x - nodes[k]);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = vals[j] * (s_all - 1.0 / (x - nodes[j]));
  }
  return out;
}

Basis1D eval_basis_matrices(int p, const QuadRule1D& rule) {
  if (p < 1) throw InvalidArgument("polynomial order must be at least 1");
  if (rule.size() < 1 || rule.points.size() != rule.weights.size()) {
    throw InvalidArgument("invalid quadrature rule");
  }
  Basis1D basis;
  basis.order = p;
  basis.nodes = gauss_lobatto_nodes(p);
  basis.rule = rule;
  const int q = rule.size();
  basis.B.resize(std::size_t(q) * (p + 1));
  basis.D.resize(std::size_t(q) * (p + 1));
  for (int iq = 0; iq < q; ++iq) {
    const auto v = lagrange_values(basis.nodes, rule.points[iq]);
    const auto dv = lagrange_derivatives(basis.nodes, rule.points[iq]);
    for (int a = 0; a <= p; ++a) {
      basis.B[iq * (p + 1) + a] = v[a];
      basis.D[iq * (p + 1) + a] = dv[a];
    }
  }
  return basis;
}

} // namespace elast
