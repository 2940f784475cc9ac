#include "elast/verify.hpp"

#include "elast/errors.hpp"
#include "elast/geometry.hpp"
#include "elast/sumfac.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace elast {

namespace {

Vec3 map_point(const std::array<std::array<double, 3>, 8>& corners, const Vec3& xi) {
  Vec3 x{};
  for (int v = 0; v < 8; ++v) {
    const double w = ((v & 1) ? xi[0] : 1.0 - xi[0]) * ((v >> 1 & 1) ? xi[1] : 1.0 - xi[1]) *
                     ((v >> 2 & 1) ? xi[2] : 1.0 - xi[2]);
    for (int i = 0; i < 3; ++i) x[i] += w * corners[v][i];
  }
  return x;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// d^order/dx^order of x^k.
double dpow(double x, int k, int order) {
  if (order > k) return 0.0;
  double c = 1.0;
  for (int i = 0; i < order; ++i) c *= k - i;
  return c * ipow(x, k - order);
}

} // namespace

int PolynomialField::max_directional_degree() const {
  int d = 0;
  for (const auto& comp : terms) {
    for (const auto& t : comp) {
      for (int e : t.exps) d = std::max(d, e);
    }
  }
  return d;
}

ExactField PolynomialField::field() const {
  const auto t = terms;
  ExactField f;
  f.value = [t](const Vec3& x) {
    Vec3 u{};
    for (int c = 0; c < 3; ++c) {
      for (const auto& term : t[c]) {
        u[c] += term.coef * ipow(x[0], term.exps[0]) * ipow(x[1], term.exps[1]) *
                ipow(x[2], term.exps[2]);
      }
    }
    return u;
  };
  f.gradient = [t](const Vec3& x) {
    Mat3 g{};
    for (int c = 0; c < 3; ++c) {
      for (const auto& term : t[c]) {
        for (int a = 0; a < 3; ++a) {
          double v = term.coef;
          for (int k = 0; k < 3; ++k) v *= dpow(x[k], term.exps[k], k == a ? 1 : 0);
          g[c][a] += v;
        }
      }
    }
    return g;
  };
  f.hessian = [t](const Vec3& x) {
    std::array<Mat3, 3> h{};
    for (int c = 0; c < 3; ++c) {
      for (const auto& term : t[c]) {
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            double v = term.coef;
            for (int k = 0; k < 3; ++k) v *= dpow(x[k], term.exps[k], int(k == a) + int(k == b));
            h[c][a][b] += v;
          }
        }
      }
    }
    return h;
  };
  return f;
}

Vec3 ManufacturedCase::body_force(const Vec3& x) const {
  const auto C = stiffness_matrix(material);
  const auto H = exact.hessian(x);
  Vec3 f{};
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) s += C[6 * voigt_index(i, j) + voigt_index(k, l)] * H[k][j][l];
      }
    }
    f[i] = -s;
  }
  return f;
}

ManufacturedCase smooth_sine_case(const VoigtMaterial& material) {
  constexpr double pi = std::numbers::pi;
  constexpr double amp = 0.1;
  ManufacturedCase mc;
  mc.name = "sine";
  mc.material = material;
  mc.exact.value = [](const Vec3& x) {
    const double s = amp * std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]);
    return Vec3{s, s, s};
  };
  mc.exact.gradient = [](const Vec3& x) {
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]), sz = std::sin(pi * x[2]);
    const double cx = std::cos(pi * x[0]), cy = std::cos(pi * x[1]), cz = std::cos(pi * x[2]);
    const std::array<double, 3> g = {amp * pi * cx * sy * sz, amp * pi * sx * cy * sz,
                                     amp * pi * sx * sy * cz};
    Mat3 m{};
    for (int c = 0; c < 3; ++c) m[c] = g;
    return m;
  };
  mc.exact.hessian = [](const Vec3& x) {
    const double s[3] = {std::sin(pi * x[0]), std::sin(pi * x[1]), std::sin(pi * x[2])};
    const double c[3] = {std::cos(pi * x[0]), std::cos(pi * x[1]), std::cos(pi * x[2])};
    Mat3 h{};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double v = amp * pi * pi;
        for (int k = 0; k < 3; ++k) {
          if (a == b && k == a) {
            v *= -s[k];
          } else if (k == a || k == b) {
            v *= c[k];
          } else {
            v *= s[k];
          }
        }
        h[a][b] = v;
      }
    }
    return std::array<Mat3, 3>{h, h, h};
  };
  return mc;
}

ManufacturedCase polynomial_case(const PolynomialField& poly, const VoigtMaterial& material) {
  ManufacturedCase mc;
  mc.name = "polynomial";
  mc.exact = poly.field();
  mc.material = material;
  return mc;
}

std::vector<double> assemble_load(const FESpace& space, const VectorField& f,
                                  const QuadRule1D& rule) {
  const auto basis = eval_basis_matrices(space.order(), rule);
  const auto geom = compute_geometry_factors(space, rule);
  const int q = rule.size();
  const int Q = q * q * q;
  const std::size_t n3 = std::size_t(space.dofs_per_element());
  std::vector<double> F(space.vector_ndof(), 0.0);
  std::vector<double> fq(3 * std::size_t(Q)), local(3 * n3);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto corners = space.mesh().cell_corners(e);
    for (int qp = 0; qp < Q; ++qp) {
      const Vec3 xi = {rule.points[qp % q], rule.points[(qp / q) % q], rule.points[qp / (q * q)]};
      const Vec3 fx = f(map_point(corners, xi));
      const double wdet = geom.weight(qp) * geom.detJ(e, qp);
      for (int c = 0; c < 3; ++c) fq[std::size_t(c) * Q + qp] = wdet * fx[c];
    }
    std::fill(local.begin(), local.end(), 0.0);
    for (int c = 0; c < 3; ++c) {
      sumfac_values_transpose(basis, fq.data() + std::size_t(c) * Q, local.data() + c * n3);
    }
    space.scatter_add(e, local, F);
  }
  return F;
}

std::vector<double> manufactured_rhs(const ManufacturedCase& mcase, const FESpace& space,
                                     const QuadRule1D& rule) {
  return assemble_load(space, [&](const Vec3& x) { return mcase.body_force(x); }, rule);
}

std::vector<double> manufactured_rhs(const ManufacturedCase& mcase, const FESpace& space) {
  return manufactured_rhs(mcase, space, gauss_legendre_rule(space.order() + 1));
}

std::vector<double> dirichlet_rhs(const LinearOperator& op, std::span<const double> load,
                                  std::span<const double> boundary_values, const BcConstraint& bc) {
  const std::size_t n = op.size();
  std::vector<double> g(n, 0.0), ag(n, 0.0);
  for (auto d : bc.dofs) g[d] = boundary_values[d];
  op.mult(g, ag);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = load[i] - ag[i];
  for (auto d : bc.dofs) rhs[d] = boundary_values[d];
  return rhs;
}

double l2_error(const FESpace& space, std::span<const double> x, const VectorField& exact,
                const QuadRule1D& rule) {
  if (x.size() != space.vector_ndof()) throw InvalidArgument("l2_error: vector length mismatch");
  const auto basis = eval_basis_matrices(space.order(), rule);
  const auto geom = compute_geometry_factors(space, rule);
  const int q = rule.size();
  const int Q = q * q * q;
  const std::size_t n3 = std::size_t(space.dofs_per_element());
  std::vector<double> local(3 * n3), uq(3 * std::size_t(Q));
  double sum = 0.0;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    space.gather(e, x, local);
    for (int c = 0; c < 3; ++c) {
      sumfac_values(basis, local.data() + c * n3, uq.data() + std::size_t(c) * Q);
    }
    const auto corners = space.mesh().cell_corners(e);
    for (int qp = 0; qp < Q; ++qp) {
      const Vec3 xi = {rule.points[qp % q], rule.points[(qp / q) % q], rule.points[qp / (q * q)]};
      const Vec3 u = exact(map_point(corners, xi));
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = uq[std::size_t(c) * Q + qp] - u[c];
        d2 += d * d;
      }
      sum += geom.weight(qp) * geom.detJ(e, qp) * d2;
    }
  }
  return std::sqrt(sum);
}

double l2_error(const FESpace& space, std::span<const double> x, const VectorField& exact) {
  return l2_error(space, x, exact, gauss_legendre_rule(space.order() + 2));
}

PatchTestResult patch_test(const FESpace& space, const VoigtMaterial& material,
                           const PolynomialField& u, Variant variant) {
  const auto mcase = polynomial_case(u, material);
  const auto field = MaterialField::constant(material);
  const auto op = make_operator(variant, space, field);
  const auto bc = boundary_dofs(space, kAllFaces,
                                std::array<Component, 3>{Component::X, Component::Y, Component::Z});
  const ConstrainedOperator cop(*op, bc);
  const auto load = manufactured_rhs(mcase, space);
  const auto g = space.interpolate(mcase.exact.value);
  const auto rhs = dirichlet_rhs(*op, load, g, bc);
  const JacobiPreconditioner jac(cop.constrain_diagonal(op->assemble_diagonal()));
  std::vector<double> x(space.vector_ndof());
  const auto rep = cg_solve(cop, &jac, rhs, x, 1e-12, 20000);

  PatchTestResult res;
  res.iterations = rep.iterations;
  res.error = l2_error(space, x, mcase.exact.value);
  // Field scale: L2 norm of the exact solution, at least 1.
  const std::vector<double> zero(space.vector_ndof(), 0.0);
  res.scale = std::max(1.0, l2_error(space, zero, mcase.exact.value));
  res.passed = rep.converged && res.error <= 1e-9 * res.scale;
  return res;
}

std::vector<ConvergenceRow> convergence_study(const ManufacturedCase& mcase, int p, int max_levels,
                                              const ConvergenceOptions& options) {
  if (max_levels < 1) throw InvalidArgument("convergence study needs at least one level");
  const auto base = build_cartesian_mesh({1, 1, 1}, {options.base_cells, options.base_cells,
                                                     options.base_cells});
  const auto field = MaterialField::constant(mcase.material);
  BcSpec bc_spec;
  bc_spec.faces.assign(kAllFaces.begin(), kAllFaces.end());
  GmgOptions gopt;
  gopt.fine_variant = options.variant;

  std::vector<ConvergenceRow> rows;
  CartesianMesh mesh = base;
  for (int level = 0; level < max_levels; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    const FESpace space(mesh, p);
    const auto bc = bc_spec.on(space);
    const auto g = space.interpolate(mcase.exact.value);
    const auto load = manufactured_rhs(mcase, space);
    std::vector<double> x(space.vector_ndof());
    ConvergenceRow row;
    row.level = level;
    const auto hs = mesh.cell_size();
    row.h = *std::max_element(hs.begin(), hs.end());
    row.scalar_ndof = space.scalar_ndof();
    if (level == 0) {
      const auto fa = make_operator(Variant::FA, space, field);
      const auto rhs = dirichlet_rhs(*fa, load, g, bc);
      CoarseSolver direct(constrain_matrix(*fa->matrix(), bc), 0, space.vector_ndof());
      direct.solve(rhs, x);
    } else {
      const auto gmg = build_gmg(base, level + 1, p, field, bc_spec, gopt);
      const auto& op = gmg->fine_operator();
      const auto rhs = dirichlet_rhs(op.inner(), load, g, bc);
      const auto rep = cg_solve(op, gmg.get(), rhs, x, options.rel_tol, options.max_iters);
      if (!rep.converged) {
        throw StudyError("convergence study: solver did not converge on level " +
                         std::to_string(level));
      }
      row.iterations = rep.iterations;
    }
    row.l2_error = l2_error(space, x, mcase.exact.value);
    row.rate = rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                            : std::log2(rows.back().l2_error / row.l2_error);
    rows.push_back(row);
  }
  return rows;
}

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream out;
  out << std::setw(6) << "level" << std::setw(12) << "h" << std::setw(12) << "ndof"
      << std::setw(16) << "L2 error" << std::setw(8) << "rate" << std::setw(7) << "iters" << '\n';
  for (const auto& r : rows) {
    out << std::setw(6) << r.level << std::setw(12) << std::setprecision(5) << r.h << std::setw(12)
        << r.scalar_ndof << std::setw(16) << std::scientific << std::setprecision(6) << r.l2_error
        << std::defaultfloat << std::setw(8) << std::fixed << std::setprecision(3);
    if (std::isnan(r.rate)) {
      out << "-";
    } else {
      out << r.rate;
    }
    out << std::defaultfloat << std::setw(7) << r.iterations << '\n';
  }
  return out.str();
}

} // namespace elast
