#pragma once

#include "elast/mesh.hpp"
#include "elast/operators.hpp"
#include "elast/solvers.hpp"
#include "elast/space.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace elast {

/// Faces and components held fixed (homogeneous Dirichlet).
struct BcSpec {
  std::vector<BoxFace> faces;
  std::vector<Component> components = {Component::X, Component::Y, Component::Z};

  BcConstraint on(const FESpace& space) const { return boundary_dofs(space, faces, components); }
};

struct GmgOptions {
  int chebyshev_order = 3;
  int smoothing_steps = 1;
  int power_iterations = 10;
  std::uint64_t seed = 12345;
  Variant fine_variant = Variant::PAop;
  std::size_t direct_cap = CoarseSolver::kDefaultDirectCap;
};

/// Geometric multigrid V-cycle used as a preconditioner: Chebyshev smoothing
/// with matrix-free operators on the fine levels, an assembled solve on the
/// coarsest. Constrained DOFs pass through unchanged.
class GmgPreconditioner : public LinearOperator {
public:
  struct Level {
    std::unique_ptr<FESpace> space;
    BcConstraint bc;
    std::unique_ptr<ElasticOperator> op;
    std::unique_ptr<ConstrainedOperator> constrained;
    std::unique_ptr<ChebyshevSmoother> smoother;
    std::unique_ptr<Prolongation> prolongation;  // from the next coarser level
  };

  GmgPreconditioner(const CartesianMesh& base_mesh, int levels, int order,
                    const MaterialField& material, const BcSpec& bc, const GmgOptions& options);

  std::size_t size() const override;
  /// y += M x.
  void add_mult(std::span<const double> x, std::span<double> y) const override;

  int num_levels() const { return int(levels_.size()); }
  /// Level 0 is the coarsest.
  const Level& level(int l) const { return levels_[std::size_t(l)]; }
  const CoarseSolver& coarse_solver() const { return *coarse_; }
  const ConstrainedOperator& fine_operator() const { return *levels_.back().constrained; }
  const FESpace& fine_space() const { return *levels_.back().space; }

private:
  void vcycle(int l, std::span<const double> b, std::span<double> x) const;

  std::vector<Level> levels_;
  std::unique_ptr<CoarseSolver> coarse_;
  GmgOptions options_;
};

/// Throws InvalidArgument if levels < 2 or the material is not constant
/// (coarse levels re-create the material on their own meshes).
std::unique_ptr<GmgPreconditioner> build_gmg(const CartesianMesh& base_mesh, int levels, int order,
                                             const MaterialField& material, const BcSpec& bc,
                                             const GmgOptions& options = {});

/// z = M b.
void gmg_vcycle(const GmgPreconditioner& m, std::span<const double> b, std::span<double> z);

} // namespace elast
