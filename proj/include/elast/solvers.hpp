#pragma once

#include "elast/linear_operator.hpp"
#include "elast/sparse_matrix.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace elast {

/// z += D^{-1} r.
class JacobiPreconditioner : public LinearOperator {
public:
  explicit JacobiPreconditioner(std::vector<double> diag);
  std::size_t size() const override { return inv_diag_.size(); }
  void add_mult(std::span<const double> x, std::span<double> y) const override;
  const std::vector<double>& inverse_diagonal() const { return inv_diag_; }

private:
  std::vector<double> inv_diag_;
};

class IdentityOperator : public LinearOperator {
public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}
  std::size_t size() const override { return n_; }
  void add_mult(std::span<const double> x, std::span<double> y) const override;

private:
  std::size_t n_;
};

/// Largest eigenvalue of D^{-1} A by power iteration with Rayleigh quotients,
/// times a 1.1 safety factor. Throws SolverError for a zero operator.
double power_iteration_lambda_max(const LinearOperator& op, std::span<const double> inv_diag,
                                  int iters, std::uint64_t seed);

/// Degree-k Chebyshev polynomial in D^{-1} A targeting [alpha, beta] * lambda_max.
class ChebyshevSmoother {
public:
  ChebyshevSmoother(const LinearOperator& op, std::vector<double> inv_diag, double lambda_max,
                    int order, double alpha = 0.1, double beta = 1.1);

  /// x <- x + p_k(D^{-1} A) D^{-1} (b - A x); k operator applications.
  void smooth(std::span<const double> b, std::span<double> x) const;

  double lambda_max() const { return lambda_max_; }
  int order() const { return order_; }
  double lower() const { return alpha_ * lambda_max_; }
  double upper() const { return beta_ * lambda_max_; }
  const LinearOperator& op() const { return op_; }

private:
  const LinearOperator& op_;
  std::vector<double> inv_diag_;
  double lambda_max_;
  int order_;
  double alpha_, beta_;
};

void chebyshev_smooth(const ChebyshevSmoother& s, std::span<const double> b, std::span<double> x);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< relative preconditioned residual norms
  bool converged = false;
  double final_relative_residual = 0.0;
};

/// Preconditioned CG from x = 0. Convergence is measured on sqrt(<r, M r>)
/// relative to its initial value. `precond` may be null (no preconditioning).
/// Throws SolverError if <d, A d> <= 0.
SolveReport cg_solve(const LinearOperator& op, const LinearOperator* precond,
                     std::span<const double> b, std::span<double> x, double rel_tol,
                     int max_iters);

/// Solver for the assembled, constrained coarsest-level matrix: sparse
/// Cholesky up to `direct_cap` unknowns, Jacobi-preconditioned CG to 1e-10
/// beyond that.
class CoarseSolver {
public:
  static constexpr std::size_t kDefaultDirectCap = 6000;

  CoarseSolver(SparseMatrix matrix, int level, std::size_t direct_cap = kDefaultDirectCap);
  ~CoarseSolver();
  CoarseSolver(CoarseSolver&&) noexcept;

  bool direct() const { return direct_; }
  const SparseMatrix& matrix() const { return matrix_; }
  void solve(std::span<const double> b, std::span<double> x) const;

private:
  struct Factor;
  SparseMatrix matrix_;
  int level_;
  bool direct_;
  std::unique_ptr<Factor> factor_;
  std::unique_ptr<JacobiPreconditioner> jacobi_;
};

std::vector<double> coarse_solve(const SparseMatrix& constrained, std::span<const double> b);

} // namespace elast
