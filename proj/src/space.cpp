#include "elast/space.hpp"

#include "elast/errors.hpp"

#include <algorithm>
#include <cmath>

namespace elast {

bool BcConstraint::contains(std::size_t dof) const {
  return std::binary_search(dofs.begin(), dofs.end(), dof);
}

FESpace::FESpace(CartesianMesh mesh, int order)
    : mesh_(std::move(mesh)), order_(order) {
  if (order < 1) throw InvalidArgument("polynomial order must be at least 1");
  nodes_1d_ = gauss_lobatto_nodes(order);
  const auto& cells = mesh_.cells_per_axis();
  for (int k = 0; k < 3; ++k) lattice_[k] = order * cells[k] + 1;
  scalar_ndof_ = std::size_t(lattice_[0]) * lattice_[1] * lattice_[2];
  const int n1 = order + 1;
  dofs_per_element_ = n1 * n1 * n1;

  const std::size_t nel = mesh_.num_cells();
  element_dof_table_.resize(nel * dofs_per_element_);
  for (std::size_t e = 0; e < nel; ++e) {
    const auto c = mesh_.cell_coords(e);
    int* out = element_dof_table_.data() + e * dofs_per_element_;
    for (int k = 0; k < n1; ++k) {
      for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n1; ++i) {
          const int gi = order * c[0] + i, gj = order * c[1] + j, gk = order * c[2] + k;
          *out++ = gi + lattice_[0] * (gj + lattice_[1] * gk);
        }
      }
    }
    colors_[(c[0] & 1) + 2 * (c[1] & 1) + 4 * (c[2] & 1)].push_back(e);
  }
}

std::span<const int> FESpace::element_dofs(std::size_t element) const {
  return {element_dof_table_.data() + element * dofs_per_element_,
          std::size_t(dofs_per_element_)};
}

double FESpace::lattice_coordinate(int axis, int index) const {
  const int n = mesh_.cells_per_axis()[axis];
  int e = index / order_;
  if (e >= n) e = n - 1;
  const int a = index - order_ * e;
  if (a == 0) return mesh_.vertex_coordinate(axis, e);
  if (a == order_) return mesh_.vertex_coordinate(axis, e + 1);
  return mesh_.extents()[axis] * (double(e) + nodes_1d_[a]) / double(n);
}

std::array<int, 3> FESpace::node_lattice_index(std::size_t node) const {
  const std::size_t nx = lattice_[0], ny = lattice_[1];
  return {int(node % nx), int((node / nx) % ny), int(node / (nx * ny))};
}

std::array<double, 3> FESpace::node_coordinates(std::size_t node) const {
  const auto idx = node_lattice_index(node);
  return {lattice_coordinate(0, idx[0]), lattice_coordinate(1, idx[1]),
          lattice_coordinate(2, idx[2])};
}

void FESpace::gather(std::size_t element, std::span<const double> global,
                     std::span<double> local) const {
  if (global.size() != vector_ndof() || local.size() != 3 * std::size_t(dofs_per_element_)) {
    throw InvariantViolation("gather: vector size mismatch");
  }
  const auto dofs = element_dofs(element);
  const int n = dofs_per_element_;
  for (int c = 0; c < 3; ++c) {
    const double* g = global.data() + c * scalar_ndof_;
    double* l = local.data() + c * n;
    for (int i = 0; i < n; ++i) l[i] = g[dofs[i]];
  }
}

void FESpace::scatter_add(std::size_t element, std::span<const double> local,
                          std::span<double> global) const {
  if (global.size() != vector_ndof() || local.size() != 3 * std::size_t(dofs_per_element_)) {
    throw InvariantViolation("scatter_add: vector size mismatch");
  }
  const auto dofs = element_dofs(element);
  const int n = dofs_per_element_;
  for (int c = 0; c < 3; ++c) {
    double* g = global.data() + c * scalar_ndof_;
    const double* l = local.data() + c * n;
    for (int i = 0; i < n; ++i) g[dofs[i]] += l[i];
  }
}

std::vector<double> FESpace::interpolate(
    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f) const {
  std::vector<double> out(vector_ndof());
  for (std::size_t i = 0; i < scalar_ndof_; ++i) {
    const auto v = f(node_coordinates(i));
    for (int c = 0; c < 3; ++c) out[c * scalar_ndof_ + i] = v[c];
  }
  return out;
}

FESpace build_space(const CartesianMesh& mesh, int order) { return FESpace(mesh, order); }

BcConstraint boundary_dofs(const FESpace& space, std::span<const BoxFace> faces,
                           std::span<const Component> components) {
  BcConstraint bc;
  if (faces.empty() || components.empty()) return bc;
  const auto& dims = space.lattice_dims();
  std::vector<char> on_face(space.scalar_ndof(), 0);
  for (std::size_t node = 0; node < space.scalar_ndof(); ++node) {
    const auto idx = space.node_lattice_index(node);
    for (BoxFace f : faces) {
      const int axis = int(f) / 2;
      const int target = int(f) % 2 == 1 ? dims[axis] - 1 : 0;
      if (idx[axis] == target) {
        on_face[node] = 1;
        break;
      }
    }
  }
  std::vector<int> comps;
  for (Component c : components) comps.push_back(int(c));
  std::sort(comps.begin(), comps.end());
  comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
  for (int c : comps) {
    for (std::size_t node = 0; node < space.scalar_ndof(); ++node) {
      if (on_face[node]) bc.dofs.push_back(c * space.scalar_ndof() + node);
    }
  }
  return bc;
}

namespace {

struct Stencil1D {
  std::vector<std::vector<std::pair<int, double>>> rows;
};

// Interpolation of coarse lattice functions to the fine lattice along one axis.
Stencil1D stencil_1d(const FESpace& coarse, int axis) {
  const int p = coarse.order();
  const int nc = coarse.mesh().cells_per_axis()[axis];
  const int fine_points = 2 * p * nc + 1;
  const auto& nodes = coarse.nodes_1d();
  Stencil1D s;
  s.rows.resize(fine_points);
  for (int I = 0; I < fine_points; ++I) {
    int fe = I / p;
    if (fe >= 2 * nc) fe = 2 * nc - 1;
    const int a = I - p * fe;
    const int ce = fe / 2;
    // Reference coordinate of the fine node inside the coarse element.
    const double t = (double(fe % 2) + nodes[a]) / 2.0;
    const auto w = lagrange_values(nodes, t);
    for (int b = 0; b <= p; ++b) {
      if (w[b] != 0.0) s.rows[I].push_back({p * ce + b, w[b]});
    }
  }
  return s;
}

} // namespace

Prolongation::Prolongation(const FESpace& coarse, const FESpace& fine) {
  if (coarse.order() != fine.order()) {
    throw InvalidArgument("prolongation requires equal polynomial orders");
  }
  const auto& cm = coarse.mesh();
  const auto& fm = fine.mesh();
  for (int k = 0; k < 3; ++k) {
    if (fm.cells_per_axis()[k] != 2 * cm.cells_per_axis()[k] ||
        fm.extents()[k] != cm.extents()[k]) {
      throw InvalidArgument("spaces are not nested by uniform refinement");
    }
  }
  coarse_scalar_ = coarse.scalar_ndof();
  fine_scalar_ = fine.scalar_ndof();
  const Stencil1D sx = stencil_1d(coarse, 0), sy = stencil_1d(coarse, 1), sz = stencil_1d(coarse, 2);
  const auto& cd = coarse.lattice_dims();
  const auto& fd = fine.lattice_dims();
  row_ptr_.reserve(fine_scalar_ + 1);
  row_ptr_.push_back(0);
  for (int k = 0; k < fd[2]; ++k) {
    for (int j = 0; j < fd[1]; ++j) {
      for (int i = 0; i < fd[0]; ++i) {
        for (const auto& [ck, wk] : sz.rows[k]) {
          for (const auto& [cj, wj] : sy.rows[j]) {
            for (const auto& [ci, wi] : sx.rows[i]) {
              cols_.push_back(ci + cd[0] * (cj + cd[1] * ck));
              weights_.push_back(wi * wj * wk);
            }
          }
        }
        row_ptr_.push_back(cols_.size());
      }
    }
  }
}

void Prolongation::apply(std::span<const double> coarse, std::span<double> fine) const {
  if (coarse.size() != coarse_size() || fine.size() != fine_size()) {
    throw InvalidArgument("prolongation: vector size mismatch");
  }
  for (int c = 0; c < 3; ++c) {
    const double* xc = coarse.data() + c * coarse_scalar_;
    double* yf = fine.data() + c * fine_scalar_;
    for (std::size_t i = 0; i < fine_scalar_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += weights_[k] * xc[cols_[k]];
      yf[i] = s;
    }
  }
}

void Prolongation::apply_transpose(std::span<const double> fine,
                                   std::span<double> coarse) const {
  if (coarse.size() != coarse_size() || fine.size() != fine_size()) {
    throw InvalidArgument("restriction: vector size mismatch");
  }
  std::fill(coarse.begin(), coarse.end(), 0.0);
  for (int c = 0; c < 3; ++c) {
    double* yc = coarse.data() + c * coarse_scalar_;
    const double* xf = fine.data() + c * fine_scalar_;
    for (std::size_t i = 0; i < fine_scalar_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) yc[cols_[k]] += weights_[k] * xf[i];
    }
  }
}

std::span<const int> Prolongation::stencil_nodes(std::size_t fine_node) const {
  return {cols_.data() + row_ptr_[fine_node], row_ptr_[fine_node + 1] - row_ptr_[fine_node]};
}

std::span<const double> Prolongation::stencil_weights(std::size_t fine_node) const {
  return {weights_.data() + row_ptr_[fine_node], row_ptr_[fine_node + 1] - row_ptr_[fine_node]};
}

Prolongation build_prolongation(const FESpace& coarse, const FESpace& fine) {
  return Prolongation(coarse, fine);
}

} // namespace elast
