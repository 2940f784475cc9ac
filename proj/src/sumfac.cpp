#include "elast/sumfac.hpp"

#include "elast/errors.hpp"

#include <algorithm>

namespace elast {

SliceScratch::SliceScratch(const Basis1D& basis) {
  const std::size_t n = std::size_t(basis.num_dofs());
  const std::size_t q = std::size_t(basis.num_qpts());
  zb.resize(n * n);
  zd.resize(n * n);
  yb.resize(q * n);
  yd.resize(q * n);
  y2.resize(q * n);
}

void grad_slice(const Basis1D& basis, int qz, const double* u, SliceScratch& s, double* gx,
                double* gy, double* gz) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  const int n2 = n * n;
  const double* B = basis.B.data();
  const double* D = basis.D.data();

  // z stage: collapse the slowest index onto quadrature plane qz.
  std::fill(s.zb.begin(), s.zb.end(), 0.0);
  std::fill(s.zd.begin(), s.zd.end(), 0.0);
  for (int k = 0; k < n; ++k) {
    const double bk = B[qz * n + k];
    const double dk = D[qz * n + k];
    const double* uk = u + k * n2;
    for (int ji = 0; ji < n2; ++ji) {
      s.zb[ji] += bk * uk[ji];
      s.zd[ji] += dk * uk[ji];
    }
  }
  // y stage.
  for (int qy = 0; qy < q; ++qy) {
    double* bb = s.yb.data() + qy * n;
    double* bd = s.yd.data() + qy * n;
    double* db = s.y2.data() + qy * n;
    std::fill(bb, bb + n, 0.0);
    std::fill(bd, bd + n, 0.0);
    std::fill(db, db + n, 0.0);
    for (int j = 0; j < n; ++j) {
      const double bj = B[qy * n + j];
      const double dj = D[qy * n + j];
      const double* zbj = s.zb.data() + j * n;
      const double* zdj = s.zd.data() + j * n;
      for (int i = 0; i < n; ++i) {
        bb[i] += bj * zbj[i];
        bd[i] += dj * zbj[i];
        db[i] += bj * zdj[i];
      }
    }
  }
  // x stage.
  for (int qy = 0; qy < q; ++qy) {
    const double* bb = s.yb.data() + qy * n;
    const double* bd = s.yd.data() + qy * n;
    const double* db = s.y2.data() + qy * n;
    for (int qx = 0; qx < q; ++qx) {
      const double* Bx = B + qx * n;
      const double* Dx = D + qx * n;
      double ax = 0.0, ay = 0.0, az = 0.0;
      for (int i = 0; i < n; ++i) {
        ax += Dx[i] * bb[i];
        ay += Bx[i] * bd[i];
        az += Bx[i] * db[i];
      }
      gx[qy * q + qx] = ax;
      gy[qy * q + qx] = ay;
      gz[qy * q + qx] = az;
    }
  }
}

void grad_slice_transpose(const Basis1D& basis, int qz, const double* fx, const double* fy,
                          const double* fz, SliceScratch& s, double* v) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  const int n2 = n * n;
  const double* B = basis.B.data();
  const double* D = basis.D.data();

  // x stage: yb <- D^T fx, yd <- B^T fy, y2 <- B^T fz.
  for (int qy = 0; qy < q; ++qy) {
    double* xd = s.yb.data() + qy * n;
    double* xb1 = s.yd.data() + qy * n;
    double* xb2 = s.y2.data() + qy * n;
    std::fill(xd, xd + n, 0.0);
    std::fill(xb1, xb1 + n, 0.0);
    std::fill(xb2, xb2 + n, 0.0);
    for (int qx = 0; qx < q; ++qx) {
      const double ax = fx[qy * q + qx];
      const double ay = fy[qy * q + qx];
      const double az = fz[qy * q + qx];
      const double* Bx = B + qx * n;
      const double* Dx = D + qx * n;
      for (int i = 0; i < n; ++i) {
        xd[i] += Dx[i] * ax;
        xb1[i] += Bx[i] * ay;
        xb2[i] += Bx[i] * az;
      }
    }
  }
  // y stage: zb <- B^T xd + D^T xb1, zd <- B^T xb2.
  std::fill(s.zb.begin(), s.zb.end(), 0.0);
  std::fill(s.zd.begin(), s.zd.end(), 0.0);
  for (int qy = 0; qy < q; ++qy) {
    const double* xd = s.yb.data() + qy * n;
    const double* xb1 = s.yd.data() + qy * n;
    const double* xb2 = s.y2.data() + qy * n;
    for (int j = 0; j < n; ++j) {
      const double bj = B[qy * n + j];
      const double dj = D[qy * n + j];
      double* zbj = s.zb.data() + j * n;
      double* zdj = s.zd.data() + j * n;
      for (int i = 0; i < n; ++i) {
        zbj[i] += bj * xd[i] + dj * xb1[i];
        zdj[i] += bj * xb2[i];
      }
    }
  }
  // z stage.
  for (int k = 0; k < n; ++k) {
    const double bk = B[qz * n + k];
    const double dk = D[qz * n + k];
    double* vk = v + k * n2;
    for (int ji = 0; ji < n2; ++ji) vk[ji] += bk * s.zb[ji] + dk * s.zd[ji];
  }
}

std::vector<double> sumfac_grad(std::span<const double> local_u, const Basis1D& basis) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  if (local_u.size() != std::size_t(n * n * n)) {
    throw InvalidArgument("sumfac_grad: expected (p+1)^3 nodal values");
  }
  SliceScratch s(basis);
  std::vector<double> gx(q * q), gy(q * q), gz(q * q);
  std::vector<double> out(std::size_t(3) * q * q * q);
  for (int qz = 0; qz < q; ++qz) {
    grad_slice(basis, qz, local_u.data(), s, gx.data(), gy.data(), gz.data());
    for (int k = 0; k < q * q; ++k) {
      const std::size_t qp = std::size_t(qz) * q * q + k;
      out[3 * qp] = gx[k];
      out[3 * qp + 1] = gy[k];
      out[3 * qp + 2] = gz[k];
    }
  }
  return out;
}

std::vector<double> sumfac_grad_transpose(std::span<const double> q_values, const Basis1D& basis) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  if (q_values.size() != std::size_t(3) * q * q * q) {
    throw InvalidArgument("sumfac_grad_transpose: expected 3 q^3 values");
  }
  SliceScratch s(basis);
  std::vector<double> fx(q * q), fy(q * q), fz(q * q);
  std::vector<double> v(std::size_t(n) * n * n, 0.0);
  for (int qz = 0; qz < q; ++qz) {
    for (int k = 0; k < q * q; ++k) {
      const std::size_t qp = std::size_t(qz) * q * q + k;
      fx[k] = q_values[3 * qp];
      fy[k] = q_values[3 * qp + 1];
      fz[k] = q_values[3 * qp + 2];
    }
    grad_slice_transpose(basis, qz, fx.data(), fy.data(), fz.data(), s, v.data());
  }
  return v;
}

std::uint64_t sumfac_fma_count(int p, int q) {
  const std::uint64_t n = std::uint64_t(p) + 1;
  const std::uint64_t Q = std::uint64_t(q);
  return 2 * Q * n * n * n + 3 * Q * Q * n * n + 3 * Q * Q * Q * n;
}

std::vector<double> build_gradient_table(const Basis1D& basis) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  const std::size_t n3 = std::size_t(n) * n * n;
  std::vector<double> G(std::size_t(q) * q * q * 3 * n3);
  for (int qz = 0; qz < q; ++qz) {
    for (int qy = 0; qy < q; ++qy) {
      for (int qx = 0; qx < q; ++qx) {
        const std::size_t qp = (std::size_t(qz) * q + qy) * q + qx;
        for (int k = 0; k < n; ++k) {
          for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
              const std::size_t a = (std::size_t(k) * n + j) * n + i;
              const double bx = basis.b(qx, i), by = basis.b(qy, j), bz = basis.b(qz, k);
              G[(qp * 3 + 0) * n3 + a] = basis.d(qx, i) * by * bz;
              G[(qp * 3 + 1) * n3 + a] = bx * basis.d(qy, j) * bz;
              G[(qp * 3 + 2) * n3 + a] = bx * by * basis.d(qz, k);
            }
          }
        }
      }
    }
  }
  return G;
}

} // namespace elast

namespace elast {

void sumfac_values(const Basis1D& basis, const double* u, double* out) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  std::vector<double> t1(std::size_t(n) * n * q, 0.0), t2(std::size_t(n) * q * q, 0.0);
  // t1[k][j][qx]
  for (int kj = 0; kj < n * n; ++kj) {
    for (int qx = 0; qx < q; ++qx) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += basis.b(qx, i) * u[kj * n + i];
      t1[std::size_t(kj) * q + qx] = s;
    }
  }
  // t2[k][qy][qx]
  for (int k = 0; k < n; ++k) {
    for (int qy = 0; qy < q; ++qy) {
      for (int qx = 0; qx < q; ++qx) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += basis.b(qy, j) * t1[(std::size_t(k) * n + j) * q + qx];
        t2[(std::size_t(k) * q + qy) * q + qx] = s;
      }
    }
  }
  for (int qz = 0; qz < q; ++qz) {
    for (int qyx = 0; qyx < q * q; ++qyx) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += basis.b(qz, k) * t2[std::size_t(k) * q * q + qyx];
      out[std::size_t(qz) * q * q + qyx] = s;
    }
  }
}

void sumfac_values_transpose(const Basis1D& basis, const double* f, double* v) {
  const int n = basis.num_dofs();
  const int q = basis.num_qpts();
  std::vector<double> t2(std::size_t(n) * q * q, 0.0), t1(std::size_t(n) * n * q, 0.0);
  for (int k = 0; k < n; ++k) {
    for (int qyx = 0; qyx < q * q; ++qyx) {
      double s = 0.0;
      for (int qz = 0; qz < q; ++qz) s += basis.b(qz, k) * f[std::size_t(qz) * q * q + qyx];
      t2[std::size_t(k) * q * q + qyx] = s;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int qx = 0; qx < q; ++qx) {
        double s = 0.0;
        for (int qy = 0; qy < q; ++qy) s += basis.b(qy, j) * t2[(std::size_t(k) * q + qy) * q + qx];
        t1[(std::size_t(k) * n + j) * q + qx] = s;
      }
    }
  }
  for (int kj = 0; kj < n * n; ++kj) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int qx = 0; qx < q; ++qx) s += basis.b(qx, i) * t1[std::size_t(kj) * q + qx];
      v[std::size_t(kj) * n + i] += s;
    }
  }
}

} // namespace elast
