#include "elast/solvers.hpp"

#include "elast/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <random>
#include <string>

namespace elast {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

} // namespace

JacobiPreconditioner::JacobiPreconditioner(std::vector<double> diag) : inv_diag_(std::move(diag)) {
  for (auto& d : inv_diag_) {
    if (!(d > 0.0)) throw SolverError("Jacobi preconditioner needs a positive diagonal");
    d = 1.0 / d;
  }
}

void JacobiPreconditioner::add_mult(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < inv_diag_.size(); ++i) y[i] += inv_diag_[i] * x[i];
}

void IdentityOperator::add_mult(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) y[i] += x[i];
}

double power_iteration_lambda_max(const LinearOperator& op, std::span<const double> inv_diag,
                                  int iters, std::uint64_t seed) {
  if (iters < 1) throw InvalidArgument("power iteration needs at least one iteration");
  const std::size_t n = op.size();
  if (inv_diag.size() != n) throw InvalidArgument("power iteration: diagonal size mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n), y(n);
  for (auto& x : v) x = u(rng);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    double vdv = 0.0;
    for (std::size_t i = 0; i < n; ++i) vdv += v[i] * v[i] / inv_diag[i];
    const double scale = 1.0 / std::sqrt(vdv);
    for (auto& x : v) x *= scale;
    op.mult(v, y);
    lambda = dot(v, y);
    double ynorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = inv_diag[i] * y[i];
      ynorm += v[i] * v[i];
    }
    if (!(ynorm > 0.0) || !std::isfinite(ynorm)) {
      throw SolverError("spectral estimate failed: operator is zero or not finite");
    }
  }
  if (!(lambda > 0.0)) throw SolverError("spectral estimate is not positive");
  return 1.1 * lambda;
}

ChebyshevSmoother::ChebyshevSmoother(const LinearOperator& op, std::vector<double> inv_diag,
                                     double lambda_max, int order, double alpha, double beta)
    : op_(op), inv_diag_(std::move(inv_diag)), lambda_max_(lambda_max), order_(order),
      alpha_(alpha), beta_(beta) {
  if (!(lambda_max > 0.0)) throw InvalidArgument("Chebyshev smoother needs lambda_max > 0");
  if (order < 1) throw InvalidArgument("Chebyshev order must be at least 1");
  if (!(alpha > 0.0 && alpha <= beta)) throw InvalidArgument("Chebyshev interval needs 0 < alpha <= beta");
  if (inv_diag_.size() != op.size()) throw InvalidArgument("Chebyshev: diagonal size mismatch");
}

void ChebyshevSmoother::smooth(std::span<const double> b, std::span<double> x) const {
  const std::size_t n = op_.size();
  const double a = lower(), c = upper();
  const double theta = 0.5 * (c + a);
  const double delta = 0.5 * (c - a);
  std::vector<double> r(n), d(n), ad(n);
  op_.mult(x, ad);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ad[i];
    d[i] = inv_diag_[i] * r[i] / theta;
    x[i] += d[i];
  }
  if (order_ == 1) return;
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  for (int k = 1; k < order_; ++k) {
    op_.mult(d, ad);
    const double rho_new = 1.0 / (2.0 * sigma - rho);
    const double c1 = rho_new * rho;
    const double c2 = 2.0 * rho_new / delta;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] -= ad[i];
      d[i] = c1 * d[i] + c2 * inv_diag_[i] * r[i];
      x[i] += d[i];
    }
    rho = rho_new;
  }
}

void chebyshev_smooth(const ChebyshevSmoother& s, std::span<const double> b, std::span<double> x) {
  s.smooth(b, x);
}

SolveReport cg_solve(const LinearOperator& op, const LinearOperator* precond,
                     std::span<const double> b, std::span<double> x, double rel_tol,
                     int max_iters) {
  const std::size_t n = op.size();
  if (b.size() != n || x.size() != n) throw InvalidArgument("cg_solve: length mismatch");
  if (precond && precond->size() != n) throw InvalidArgument("cg_solve: preconditioner size mismatch");
  SolveReport rep;
  std::fill(x.begin(), x.end(), 0.0);
  std::vector<double> r(b.begin(), b.end()), z(n), d(n), ad(n);
  auto apply_m = [&](std::span<const double> in, std::span<double> out) {
    if (precond) {
      precond->mult(in, out);
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };
  apply_m(r, z);
  double rz = dot(r, z);
  if (dot(r, r) == 0.0) {
    rep.converged = true;
    return rep;
  }
  if (!(rz > 0.0)) throw SolverError("preconditioner is not positive definite");
  const double norm0 = std::sqrt(rz);
  rep.residual_history.push_back(1.0);
  rep.final_relative_residual = 1.0;
  d = z;
  for (int k = 1; k <= max_iters; ++k) {
    op.mult(d, ad);
    const double dad = dot(d, ad);
    if (!(dad > 0.0)) throw SolverError("operator is not positive definite (<d, A d> <= 0)");
    const double alpha = rz / dad;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * d[i];
      r[i] -= alpha * ad[i];
    }
    apply_m(r, z);
    const double rz_new = dot(r, z);
    if (rz_new < 0.0) throw SolverError("preconditioner is not positive definite");
    const double rel = std::sqrt(rz_new) / norm0;
    rep.iterations = k;
    rep.final_relative_residual = rel;
    if (rel > 0.0) rep.residual_history.push_back(rel);
    if (rel <= rel_tol) {
      rep.converged = true;
      return rep;
    }
    const double beta = rz_new / rz;
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
    rz = rz_new;
  }
  return rep;
}

struct CoarseSolver::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

CoarseSolver::CoarseSolver(SparseMatrix matrix, int level, std::size_t direct_cap)
    : matrix_(std::move(matrix)), level_(level), direct_(matrix_.size() <= direct_cap) {
  const std::string where = "coarse solver (level " + std::to_string(level_) + ")";
  if (direct_) {
    const auto n = Eigen::Index(matrix_.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(matrix_.nnz());
    for (Eigen::Index r = 0; r < n; ++r) {
      for (auto k = matrix_.row_ptr()[r]; k < matrix_.row_ptr()[r + 1]; ++k) {
        trips.emplace_back(r, matrix_.cols()[k], matrix_.values()[k]);
      }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    factor_ = std::make_unique<Factor>();
    factor_->llt.compute(a);
    if (factor_->llt.info() != Eigen::Success) {
      throw SolverError(where + ": Cholesky factorization failed, matrix is not SPD");
    }
  } else {
    try {
      jacobi_ = std::make_unique<JacobiPreconditioner>(matrix_.diagonal());
    } catch (const SolverError&) {
      throw SolverError(where + ": non-positive diagonal");
    }
  }
}

CoarseSolver::~CoarseSolver() = default;
CoarseSolver::CoarseSolver(CoarseSolver&&) noexcept = default;

void CoarseSolver::solve(std::span<const double> b, std::span<double> x) const {
  if (direct_) {
    const auto n = Eigen::Index(b.size());
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), n);
    xv = factor_->llt.solve(bv);
    return;
  }
  try {
    const auto rep = cg_solve(matrix_, jacobi_.get(), b, x, 1e-10, 10 * int(b.size()) + 100);
    if (!rep.converged) {
      throw SolverError("did not reach 1e-10");
    }
  } catch (const SolverError& e) {
    throw SolverError("coarse solver (level " + std::to_string(level_) + "): " + e.what());
  }
}

std::vector<double> coarse_solve(const SparseMatrix& constrained, std::span<const double> b) {
  CoarseSolver s(constrained, 0);
  std::vector<double> x(b.size());
  s.solve(b, x);
  return x;
}

} // namespace elast
