#include "elast/gmg.hpp"

#include "elast/errors.hpp"

namespace elast {

GmgPreconditioner::GmgPreconditioner(const CartesianMesh& base_mesh, int levels, int order,
                                     const MaterialField& material, const BcSpec& bc,
                                     const GmgOptions& options)
    : options_(options) {
  if (levels < 2) throw InvalidArgument("multigrid needs at least 2 levels");
  if (material.scope() != MaterialField::Scope::Constant) {
    throw InvalidArgument("multigrid hierarchy requires a constant material");
  }
  CartesianMesh mesh = base_mesh;
  for (int l = 0; l < levels; ++l) {
    if (l > 0) mesh = refine_uniform(mesh);
    Level lev;
    lev.space = std::make_unique<FESpace>(mesh, order);
    lev.bc = bc.on(*lev.space);
    if (l > 0) lev.prolongation = std::make_unique<Prolongation>(*levels_.back().space, *lev.space);
    const Variant v = l == 0 ? Variant::FA : options_.fine_variant;
    lev.op = make_operator(v, *lev.space, material);
    lev.constrained = std::make_unique<ConstrainedOperator>(*lev.op, lev.bc);
    if (l == 0) {
      coarse_ = std::make_unique<CoarseSolver>(constrain_matrix(*lev.op->matrix(), lev.bc), 0,
                                               options_.direct_cap);
    } else {
      auto diag = lev.constrained->constrain_diagonal(lev.op->assemble_diagonal());
      std::vector<double> inv(diag.size());
      for (std::size_t i = 0; i < diag.size(); ++i) inv[i] = 1.0 / diag[i];
      const double lmax = power_iteration_lambda_max(*lev.constrained, inv,
                                                     options_.power_iterations, options_.seed);
      lev.smoother = std::make_unique<ChebyshevSmoother>(*lev.constrained, std::move(inv), lmax,
                                                         options_.chebyshev_order);
    }
    levels_.push_back(std::move(lev));
  }
}

std::size_t GmgPreconditioner::size() const { return levels_.back().space->vector_ndof(); }

void GmgPreconditioner::vcycle(int l, std::span<const double> b, std::span<double> x) const {
  std::fill(x.begin(), x.end(), 0.0);
  if (l == 0) {
    coarse_->solve(b, x);
    return;
  }
  const Level& lev = levels_[std::size_t(l)];
  const Level& coarse = levels_[std::size_t(l) - 1];
  const std::size_t n = x.size();
  for (int s = 0; s < options_.smoothing_steps; ++s) lev.smoother->smooth(b, x);

  std::vector<double> r(n);
  lev.constrained->mult(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  for (auto d : lev.bc.dofs) r[d] = 0.0;

  const std::size_t nc = coarse.space->vector_ndof();
  std::vector<double> rc(nc), ec(nc);
  lev.prolongation->apply_transpose(r, rc);
  for (auto d : coarse.bc.dofs) rc[d] = 0.0;
  vcycle(l - 1, rc, ec);
  for (auto d : coarse.bc.dofs) ec[d] = 0.0;
  std::vector<double> ef(n);
  lev.prolongation->apply(ec, ef);
  for (auto d : lev.bc.dofs) ef[d] = 0.0;
  for (std::size_t i = 0; i < n; ++i) x[i] += ef[i];

  for (int s = 0; s < options_.smoothing_steps; ++s) lev.smoother->smooth(b, x);
}

void GmgPreconditioner::add_mult(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) throw InvalidArgument("multigrid: vector length mismatch");
  const auto& bc = levels_.back().bc;
  std::vector<double> b(x.begin(), x.end()), z(n);
  for (auto d : bc.dofs) b[d] = 0.0;
  vcycle(num_levels() - 1, b, z);
  for (auto d : bc.dofs) z[d] = x[d];
  for (std::size_t i = 0; i < n; ++i) y[i] += z[i];
}

std::unique_ptr<GmgPreconditioner> build_gmg(const CartesianMesh& base_mesh, int levels, int order,
                                             const MaterialField& material, const BcSpec& bc,
                                             const GmgOptions& options) {
  return std::make_unique<GmgPreconditioner>(base_mesh, levels, order, material, bc, options);
}

void gmg_vcycle(const GmgPreconditioner& m, std::span<const double> b, std::span<double> z) {
  m.mult(b, z);
}

} // namespace elast
