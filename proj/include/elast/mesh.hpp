#pragma once

#include <array>
#include <cstddef>

namespace elast {

/// The six faces of the box domain.
enum class BoxFace { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

inline constexpr std::array<BoxFace, 6> kAllFaces = {
    BoxFace::XMin, BoxFace::XMax, BoxFace::YMin,
    BoxFace::YMax, BoxFace::ZMin, BoxFace::ZMax};

/// Axis-aligned structured hexahedral mesh of the box [0,Lx]x[0,Ly]x[0,Lz].
///
/// Cells and vertices are numbered lexicographically with x fastest. Vertex
/// coordinates are computed as extent * i / n so that a uniformly refined
/// mesh reproduces every coarse vertex bitwise.
class CartesianMesh {
public:
  CartesianMesh(std::array<double, 3> extents, std::array<int, 3> cells,
                int level = 0);

  const std::array<double, 3>& extents() const { return extents_; }
  const std::array<int, 3>& cells_per_axis() const { return cells_; }
  int level() const { return level_; }

  std::size_t num_cells() const;
  std::size_t num_vertices() const;
  /// Number of exterior quadrilateral faces, 2(nx ny + ny nz + nx nz).
  std::size_t num_boundary_faces() const;

  /// Lexicographic cell index -> (ix, iy, iz).
  std::array<int, 3> cell_coords(std::size_t cell) const;
  std::size_t cell_index(int ix, int iy, int iz) const;

  /// Coordinate of vertex number i along axis.
  double vertex_coordinate(int axis, int i) const;
  std::array<double, 3> vertex(std::size_t v) const;

  /// The 8 corner vertices of a cell, ordered lexicographically (x fastest).
  std::array<std::array<double, 3>, 8> cell_corners(std::size_t cell) const;

  /// Constant element Jacobian diag(extent_k / cells_k).
  std::array<double, 3> cell_size() const;

  /// Faces of the box that the given cell touches.
  bool cell_on_face(std::size_t cell, BoxFace face) const;

  bool operator==(const CartesianMesh&) const = default;

private:
  std::array<double, 3> extents_;
  std::array<int, 3> cells_;
  int level_;
};

CartesianMesh build_cartesian_mesh(std::array<double, 3> extents,
                                   std::array<int, 3> cells_per_axis);

/// Doubles the cell count along every axis; extents unchanged, level + 1.
CartesianMesh refine_uniform(const CartesianMesh& mesh);

} // namespace elast
