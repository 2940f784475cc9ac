#pragma once

#include "elast/basis.hpp"
#include "elast/geometry.hpp"
#include "elast/linear_operator.hpp"
#include "elast/material.hpp"
#include "elast/space.hpp"
#include "elast/sparse_matrix.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elast {

/// Operator realizations. PASumFac and PAVoigt are the intermediate kernel
/// stages between the PA baseline and the fused PAop kernel.
enum class Variant { FA, PA, PASumFac, PAVoigt, PAop };

std::string_view variant_name(Variant v);
/// Accepts fa, pa, pa-sumfac, pa-voigt, paop; throws InvalidArgument otherwise.
Variant parse_variant(std::string_view name);

struct CounterReport {
  std::uint64_t flops = 0;
  std::uint64_t bytes_model = 0;
  std::uint64_t applications = 0;

  double operational_intensity() const {
    return bytes_model == 0 ? 0.0 : double(flops) / double(bytes_model);
  }
};

/// Closed-form cost of one operator application.
struct ApplyCost {
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
};

/// Number of stored nonzeros of the assembled matrix, from the lattice structure.
std::uint64_t fa_nnz(const FESpace& space);

/// Cost of one application. `isotropic_points` is the number of quadrature
/// points (over the whole mesh) that use the isotropic constitutive path; the
/// remaining points use the dense 6x6 product.
ApplyCost apply_cost(Variant v, const FESpace& space, int q, std::uint64_t isotropic_points);

/// Per-element flops for an all-isotropic material (excludes FA).
std::uint64_t element_flops(Variant v, int p, int q);

/// Stored operator bytes: FA matrix; PA-family G table, QVec and geometry;
/// PAop basis tables and geometry.
std::uint64_t operator_storage_bytes(Variant v, const FESpace& space, int q);

/// Elasticity operator y += A x in one of the realizations above.
class ElasticOperator : public LinearOperator {
public:
  ElasticOperator(const ElasticOperator&) = delete;
  ElasticOperator& operator=(const ElasticOperator&) = delete;
  ~ElasticOperator() override;

  Variant variant() const { return variant_; }
  const FESpace& space() const { return space_; }
  const MaterialField& material() const { return material_; }
  const Basis1D& basis() const { return basis_; }
  const GeometryFactors& geometry() const { return geom_; }
  std::size_t size() const override { return space_.vector_ndof(); }

  void add_mult(std::span<const double> x, std::span<double> y) const override;

  /// Exact diagonal of the unconstrained matrix.
  std::vector<double> assemble_diagonal() const;

  /// Assembled matrix (FA only, nullptr otherwise).
  const SparseMatrix* matrix() const { return matrix_ ? &*matrix_ : nullptr; }

  CounterReport counters() const;
  void reset_counters() const;
  ApplyCost cost_per_apply() const { return cost_; }
  std::size_t storage_bytes() const;

  friend std::unique_ptr<ElasticOperator> make_operator(Variant, const FESpace&,
                                                        const MaterialField&, const QuadRule1D&);

private:
  ElasticOperator(Variant v, const FESpace& space, const MaterialField& material,
                  const QuadRule1D& rule);

  void apply_fa(std::span<const double> x, std::span<double> y) const;
  void apply_pa(std::span<const double> x, std::span<double> y) const;
  void apply_pa_sumfac(std::span<const double> x, std::span<double> y) const;
  void apply_pa_voigt(std::span<const double> x, std::span<double> y) const;
  void apply_fused(std::span<const double> x, std::span<double> y) const;

  Variant variant_;
  FESpace space_;
  MaterialField material_;
  Basis1D basis_;
  GeometryFactors geom_;
  ApplyCost cost_;
  std::optional<SparseMatrix> matrix_;
  std::vector<double> gtable_;
  mutable std::vector<double> qvec_;
  mutable std::atomic<std::uint64_t> applications_{0};
};

/// Builds any variant with the given quadrature rule (default q = p+1).
std::unique_ptr<ElasticOperator> make_operator(Variant v, const FESpace& space,
                                               const MaterialField& material,
                                               const QuadRule1D& rule);
std::unique_ptr<ElasticOperator> make_operator(Variant v, const FESpace& space,
                                               const MaterialField& material);

std::unique_ptr<ElasticOperator> assemble_fa(const FESpace& space, const MaterialField& material,
                                             const QuadRule1D& rule);

/// Global matrix from element stiffness matrices, K_e = sum_q w detJ B^T C B.
SparseMatrix assemble_matrix(const FESpace& space, const MaterialField& material,
                             const GeometryFactors& geom, const Basis1D& basis);

/// y += A x through the two-kernel baseline; throws InvalidArgument for other variants.
void apply_pa_baseline(const ElasticOperator& op, std::span<const double> x, std::span<double> y);
/// y += A x through the fused kernel; throws InvalidArgument for other variants.
void apply_paop(const ElasticOperator& op, std::span<const double> x, std::span<double> y);

/// Z A Z + (I - Z) for the constrained DOFs of `bc`.
class ConstrainedOperator : public LinearOperator {
public:
  ConstrainedOperator(const LinearOperator& op, BcConstraint bc);

  std::size_t size() const override { return op_.size(); }
  void add_mult(std::span<const double> x, std::span<double> y) const override;
  const BcConstraint& constraint() const { return bc_; }
  const LinearOperator& inner() const { return op_; }
  /// Inner diagonal with ones on constrained DOFs.
  std::vector<double> constrain_diagonal(std::vector<double> diag) const;

private:
  const LinearOperator& op_;
  BcConstraint bc_;
  std::vector<char> fixed_;
};

ConstrainedOperator with_essential_bc(const LinearOperator& op, BcConstraint bc);

} // namespace elast
