#pragma once

#include "elast/basis.hpp"
#include "elast/mesh.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace elast {

/// Sorted, unique list of constrained global vector-DOF indices.
struct BcConstraint {
  std::vector<std::size_t> dofs;

  bool empty() const { return dofs.empty(); }
  std::size_t size() const { return dofs.size(); }
  bool contains(std::size_t dof) const;
};

/// Components selectable for essential boundary conditions.
enum class Component { X = 0, Y = 1, Z = 2 };

/// Vector-valued (vdim = 3) continuous Lagrange space of order p on a
/// CartesianMesh.
///
/// Scalar DOFs live on the lattice of p*cells_k + 1 Gauss-Lobatto points per
/// axis, numbered lexicographically with x fastest. Vector DOFs are
/// component-blocked: global index = component * scalar_ndof + node.
class FESpace {
public:
  FESpace(CartesianMesh mesh, int order);

  const CartesianMesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  static constexpr int vdim() { return 3; }
  const std::vector<double>& nodes_1d() const { return nodes_1d_; }

  std::size_t num_elements() const { return mesh_.num_cells(); }
  std::size_t scalar_ndof() const { return scalar_ndof_; }
  std::size_t vector_ndof() const { return 3 * scalar_ndof_; }
  /// Scalar DOFs per element, (p+1)^3.
  int dofs_per_element() const { return dofs_per_element_; }
  const std::array<int, 3>& lattice_dims() const { return lattice_; }

  /// Global scalar DOF indices of an element in element-lexicographic order.
  std::span<const int> element_dofs(std::size_t element) const;

  double lattice_coordinate(int axis, int index) const;
  std::array<double, 3> node_coordinates(std::size_t node) const;
  std::array<int, 3> node_lattice_index(std::size_t node) const;

  /// Local element vector (component-blocked, 3*(p+1)^3 values) from a
  /// global vector.
  void gather(std::size_t element, std::span<const double> global,
              std::span<double> local) const;
  /// Adjoint of gather: global += G_e^T local.
  void scatter_add(std::size_t element, std::span<const double> local,
                   std::span<double> global) const;

  /// Elements grouped into 8 colors by the parity of their cell coordinates;
  /// no two elements of one color share a DOF.
  const std::array<std::vector<std::size_t>, 8>& element_colors() const { return colors_; }

  /// Nodal interpolant of a vector field.
  std::vector<double>
  interpolate(const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f) const;

  bool operator==(const FESpace& other) const {
    return order_ == other.order_ && mesh_ == other.mesh_;
  }

private:
  CartesianMesh mesh_;
  int order_;
  std::vector<double> nodes_1d_;
  std::array<int, 3> lattice_{};
  std::size_t scalar_ndof_ = 0;
  int dofs_per_element_ = 0;
  std::vector<int> element_dof_table_;
  std::array<std::vector<std::size_t>, 8> colors_;
};

FESpace build_space(const CartesianMesh& mesh, int order);

/// All vector DOFs whose lattice node lies on one of `faces`, for each of
/// `components`.
BcConstraint boundary_dofs(const FESpace& space, std::span<const BoxFace> faces,
                           std::span<const Component> components);

/// Interpolation from a coarse space to its uniform refinement (same order),
/// stored as explicit per-fine-node stencils and applied component-wise.
/// Restriction is the transpose.
class Prolongation {
public:
  Prolongation(const FESpace& coarse, const FESpace& fine);

  std::size_t coarse_size() const { return 3 * coarse_scalar_; }
  std::size_t fine_size() const { return 3 * fine_scalar_; }

  /// fine = P coarse (overwrites).
  void apply(std::span<const double> coarse, std::span<double> fine) const;
  /// coarse = P^T fine (overwrites).
  void apply_transpose(std::span<const double> fine, std::span<double> coarse) const;

  /// Stencil of fine scalar node i: (coarse node indices, weights).
  std::span<const int> stencil_nodes(std::size_t fine_node) const;
  std::span<const double> stencil_weights(std::size_t fine_node) const;

private:
  std::size_t coarse_scalar_ = 0;
  std::size_t fine_scalar_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> weights_;
};

Prolongation build_prolongation(const FESpace& coarse, const FESpace& fine);

} // namespace elast
