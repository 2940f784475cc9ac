#include "elast/errors.hpp"
#include "elast/operators.hpp"
#include "elast/sumfac.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace elast {

namespace {

struct AxisPattern {
  std::vector<int> lo, width;
};

AxisPattern axis_pattern(int cells, int p) {
  const int nl = cells * p + 1;
  AxisPattern ap;
  ap.lo.resize(nl);
  ap.width.resize(nl);
  for (int l = 0; l < nl; ++l) {
    const int emin = l == 0 ? 0 : (l - 1) / p;
    const int emax = std::min(cells - 1, l / p);
    ap.lo[l] = p * emin;
    ap.width[l] = p * (emax + 1) - ap.lo[l] + 1;
  }
  return ap;
}

// Row structure: row (c, node) holds, for each column component d, the
// lattice box spanned by the elements around the node, in lexicographic order.
struct CsrPattern {
  std::array<AxisPattern, 3> axes;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> cols;
};

CsrPattern build_pattern(const FESpace& space) {
  CsrPattern pat;
  const auto& cells = space.mesh().cells_per_axis();
  const int p = space.order();
  for (int a = 0; a < 3; ++a) pat.axes[a] = axis_pattern(cells[a], p);
  const auto L = space.lattice_dims();
  const std::size_t ns = space.scalar_ndof();
  const std::size_t n = 3 * ns;
  if (n > std::size_t(INT32_MAX)) throw InvalidArgument("problem too large for 32-bit column indices");
  pat.row_ptr.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto ijk = space.node_lattice_index(r % ns);
    const std::int64_t box = std::int64_t(pat.axes[0].width[ijk[0]]) * pat.axes[1].width[ijk[1]] *
                             pat.axes[2].width[ijk[2]];
    pat.row_ptr[r + 1] = pat.row_ptr[r] + 3 * box;
  }
  pat.cols.resize(std::size_t(pat.row_ptr[n]));
  for (std::size_t r = 0; r < n; ++r) {
    const auto ijk = space.node_lattice_index(r % ns);
    std::int64_t k = pat.row_ptr[r];
    for (int d = 0; d < 3; ++d) {
      for (int z = 0; z < pat.axes[2].width[ijk[2]]; ++z) {
        for (int y = 0; y < pat.axes[1].width[ijk[1]]; ++y) {
          for (int x = 0; x < pat.axes[0].width[ijk[0]]; ++x) {
            const std::size_t node =
                (std::size_t(pat.axes[2].lo[ijk[2]] + z) * L[1] + (pat.axes[1].lo[ijk[1]] + y)) *
                    L[0] +
                (pat.axes[0].lo[ijk[0]] + x);
            pat.cols[std::size_t(k++)] = std::int32_t(d * ns + node);
          }
        }
      }
    }
  }
  return pat;
}

} // namespace

SparseMatrix assemble_matrix(const FESpace& space, const MaterialField& material,
                             const GeometryFactors& geom, const Basis1D& basis) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int p = space.order();
  const int n1 = p + 1;
  const int n3 = space.dofs_per_element();
  const int Q = geom.points_per_element();
  const std::size_t ns = space.scalar_ndof();
  const auto Gref = build_gradient_table(basis);
  auto pat = build_pattern(space);
  std::vector<double> values(pat.cols.size(), 0.0);

  struct Scratch {
    Mat gphys;  // n3 x 3Q physical gradients
    Mat y;      // n3 x 3Q
    Mat block;  // n3 x n3
    Mat ke;     // 3 n3 x 3 n3
  };

  for (const auto& color : space.element_colors()) {
    const auto m = std::int64_t(color.size());
#pragma omp parallel
    {
      Scratch s{Mat(n3, 3 * Q), Mat(n3, 3 * Q), Mat(n3, n3), Mat(3 * n3, 3 * n3)};
#pragma omp for schedule(static)
      for (std::int64_t k = 0; k < m; ++k) {
        const std::size_t e = color[std::size_t(k)];
        for (int qp = 0; qp < Q; ++qp) {
          const double* jit = geom.JinvT(e, qp);
          for (int i = 0; i < n3; ++i) {
            double ref[3];
            for (int mm = 0; mm < 3; ++mm) ref[mm] = Gref[(std::size_t(qp) * 3 + mm) * n3 + i];
            for (int a = 0; a < 3; ++a) {
              s.gphys(i, 3 * qp + a) =
                  jit[3 * a] * ref[0] + jit[3 * a + 1] * ref[1] + jit[3 * a + 2] * ref[2];
            }
          }
        }
        for (int c = 0; c < 3; ++c) {
          for (int d = c; d < 3; ++d) {
            for (int qp = 0; qp < Q; ++qp) {
              const auto C = stiffness_matrix(material.at(e, std::size_t(qp)));
              const double wdet = geom.weight(qp) * geom.detJ(e, qp);
              double M[3][3];
              for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                  M[a][b] = wdet * C[6 * voigt_index(c, a) + voigt_index(d, b)];
                }
              }
              for (int i = 0; i < n3; ++i) {
                for (int b = 0; b < 3; ++b) {
                  s.y(i, 3 * qp + b) = s.gphys(i, 3 * qp) * M[0][b] +
                                       s.gphys(i, 3 * qp + 1) * M[1][b] +
                                       s.gphys(i, 3 * qp + 2) * M[2][b];
                }
              }
            }
            s.block.noalias() = s.y * s.gphys.transpose();
            if (c == d) {
              s.ke.block(c * n3, c * n3, n3, n3) = 0.5 * (s.block + s.block.transpose());
            } else {
              s.ke.block(c * n3, d * n3, n3, n3) = s.block;
              s.ke.block(d * n3, c * n3, n3, n3) = s.block.transpose();
            }
          }
        }

        // Scatter into the structured CSR rows.
        const auto cc = space.mesh().cell_coords(e);
        for (int c = 0; c < 3; ++c) {
          for (int i = 0; i < n3; ++i) {
            const int li[3] = {cc[0] * p + i % n1, cc[1] * p + (i / n1) % n1, cc[2] * p + i / (n1 * n1)};
            const int lo[3] = {pat.axes[0].lo[li[0]], pat.axes[1].lo[li[1]], pat.axes[2].lo[li[2]]};
            const int w[3] = {pat.axes[0].width[li[0]], pat.axes[1].width[li[1]],
                              pat.axes[2].width[li[2]]};
            const std::size_t row = c * ns + space.element_dofs(e)[i];
            const std::int64_t start = pat.row_ptr[row];
            const std::int64_t box = std::int64_t(w[0]) * w[1] * w[2];
            for (int j = 0; j < n3; ++j) {
              const int lj[3] = {cc[0] * p + j % n1, cc[1] * p + (j / n1) % n1,
                                 cc[2] * p + j / (n1 * n1)};
              const std::int64_t off =
                  (std::int64_t(lj[2] - lo[2]) * w[1] + (lj[1] - lo[1])) * w[0] + (lj[0] - lo[0]);
              for (int d = 0; d < 3; ++d) {
                values[std::size_t(start + d * box + off)] += s.ke(c * n3 + i, d * n3 + j);
              }
            }
          }
        }
      }
    }
  }
  return SparseMatrix(3 * ns, std::move(pat.row_ptr), std::move(pat.cols), std::move(values));
}

} // namespace elast
