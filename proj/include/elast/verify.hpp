#pragma once

#include "elast/gmg.hpp"
#include "elast/material.hpp"
#include "elast/operators.hpp"
#include "elast/space.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace elast {

using Vec3 = std::array<double, 3>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// Closed-form displacement with first and second derivatives.
struct ExactField {
  VectorField value;
  std::function<Mat3(const Vec3&)> gradient;                ///< [c][a] = d u_c / d x_a
  std::function<std::array<Mat3, 3>(const Vec3&)> hessian;  ///< [c][a][b]
};

/// Sum of monomials c x^i y^j z^k per component.
struct PolynomialField {
  struct Term {
    double coef;
    std::array<int, 3> exps;
  };
  std::array<std::vector<Term>, 3> terms;

  /// Largest exponent along any single axis.
  int max_directional_degree() const;
  ExactField field() const;
};

struct ManufacturedCase {
  std::string name;
  ExactField exact;
  VoigtMaterial material = Isotropic{1.0, 1.0};

  /// f = -div sigma(u_exact).
  Vec3 body_force(const Vec3& x) const;
};

/// 0.1 sin(pi x) sin(pi y) sin(pi z) (1, 1, 1) on the unit cube.
ManufacturedCase smooth_sine_case(const VoigtMaterial& material = Isotropic{1.0, 1.0});
ManufacturedCase polynomial_case(const PolynomialField& poly,
                                 const VoigtMaterial& material = Isotropic{1.0, 1.0});

/// F_i = integral of f . phi_i by tensor quadrature.
std::vector<double> assemble_load(const FESpace& space, const VectorField& f,
                                  const QuadRule1D& rule);

/// Load vector of a manufactured case with the stiffness quadrature (q = p+1
/// unless given).
std::vector<double> manufactured_rhs(const ManufacturedCase& mcase, const FESpace& space,
                                     const QuadRule1D& rule);
std::vector<double> manufactured_rhs(const ManufacturedCase& mcase, const FESpace& space);

/// System for A u = F with u = g on constrained DOFs, written for the
/// constrained operator Z A Z + (I - Z): rhs = Z (F - A g) + (I - Z) g.
std::vector<double> dirichlet_rhs(const LinearOperator& op, std::span<const double> load,
                                  std::span<const double> boundary_values, const BcConstraint& bc);

/// sqrt(integral |u_h - u|^2), element-wise tensor quadrature (q = p+2 unless given).
double l2_error(const FESpace& space, std::span<const double> x, const VectorField& exact,
                const QuadRule1D& rule);
double l2_error(const FESpace& space, std::span<const double> x, const VectorField& exact);

struct PatchTestResult {
  bool passed = false;
  double error = 0.0;
  double scale = 0.0;
  int iterations = 0;
};

/// Solves with Dirichlet data from u on all faces (CG to 1e-12) and compares.
PatchTestResult patch_test(const FESpace& space, const VoigtMaterial& material,
                           const PolynomialField& u, Variant variant = Variant::PAop);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  std::size_t scalar_ndof = 0;
  double l2_error = 0.0;
  double rate = 0.0;  ///< log2(e_{l-1}/e_l); NaN on level 0
  int iterations = 0;
};

struct ConvergenceOptions {
  int base_cells = 1;
  double rel_tol = 1e-12;
  int max_iters = 500;
  Variant variant = Variant::PAop;
};

/// Solves on base_cells^3 refined 0..max_levels-1 times, Dirichlet on all faces.
/// Throws StudyError naming the level if a solve does not converge.
std::vector<ConvergenceRow> convergence_study(const ManufacturedCase& mcase, int p, int max_levels,
                                              const ConvergenceOptions& options = {});

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows);

} // namespace elast
