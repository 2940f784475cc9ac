#pragma once

#include "elast/basis.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace elast {

/// Scratch for one z-slice of the staged 1D contractions; every buffer holds
/// at most max(p+1, q)^2 values.
class SliceScratch {
public:
  explicit SliceScratch(const Basis1D& basis);

  std::vector<double> zb, zd;         // (p+1)^2
  std::vector<double> yb, yd, y2;     // q (p+1)
};

/// Reference gradients of one scalar field on quadrature slice qz.
/// u holds (p+1)^3 lexicographic nodal values; gx, gy, gz receive q^2 values
/// each (qy major, qx fastest).
void grad_slice(const Basis1D& basis, int qz, const double* u, SliceScratch& s, double* gx,
                double* gy, double* gz);

/// Adjoint of grad_slice: v += (slice qz contribution of) G^T [fx, fy, fz].
void grad_slice_transpose(const Basis1D& basis, int qz, const double* fx, const double* fy,
                          const double* fz, SliceScratch& s, double* v);

/// Reference gradients at all q^3 points, point-major: out[3*qp + dir].
std::vector<double> sumfac_grad(std::span<const double> local_u, const Basis1D& basis);

/// Exact adjoint of sumfac_grad; returns (p+1)^3 values.
std::vector<double> sumfac_grad_transpose(std::span<const double> q_values, const Basis1D& basis);

/// FMAs of one forward (or transpose) sum-factorized gradient of a scalar field:
/// 2 q (p+1)^3 + 3 q^2 (p+1)^2 + 3 q^3 (p+1).
std::uint64_t sumfac_fma_count(int p, int q);

/// Dense reference-gradient table G[(qp*3 + dir)*(p+1)^3 + i], q^3 x 3 x (p+1)^3.
std::vector<double> build_gradient_table(const Basis1D& basis);

} // namespace elast

namespace elast {

/// Values at all q^3 points: out[qp] = sum_i B(x) B(y) B(z) u[i].
void sumfac_values(const Basis1D& basis, const double* u, double* out);
/// Adjoint of sumfac_values: v += B^T B^T B^T f.
void sumfac_values_transpose(const Basis1D& basis, const double* f, double* v);

} // namespace elast
