#include "elast/mesh.hpp"

#include "elast/errors.hpp"

#include <string>

namespace elast {

CartesianMesh::CartesianMesh(std::array<double, 3> extents,
                             std::array<int, 3> cells, int level)
    : extents_(extents), cells_(cells), level_(level) {
  for (int k = 0; k < 3; ++k) {
    if (!(extents[k] > 0.0)) {
      throw InvalidArgument("mesh extent along axis " + std::to_string(k) +
                            " must be positive");
    }
    if (cells[k] < 1) {
      throw InvalidArgument("mesh cell count along axis " + std::to_string(k) +
                            " must be at least 1");
    }
  }
  if (level < 0) throw InvalidArgument("mesh level must be non-negative");
}

std::size_t CartesianMesh::num_cells() const {
  return std::size_t(cells_[0]) * cells_[1] * cells_[2];
}

std::size_t CartesianMesh::num_vertices() const {
  return std::size_t(cells_[0] + 1) * (cells_[1] + 1) * (cells_[2] + 1);
}

std::size_t CartesianMesh::num_boundary_faces() const {
  const std::size_t nx = cells_[0], ny = cells_[1], nz = cells_[2];
  return 2 * (nx * ny + ny * nz + nx * nz);
}

std::array<int, 3> CartesianMesh::cell_coords(std::size_t cell) const {
  const int ix = int(cell % cells_[0]);
  const int iy = int((cell / cells_[0]) % cells_[1]);
  const int iz = int(cell / (std::size_t(cells_[0]) * cells_[1]));
  return {ix, iy, iz};
}

std::size_t CartesianMesh::cell_index(int ix, int iy, int iz) const {
  return std::size_t(ix) + std::size_t(cells_[0]) * (iy + std::size_t(cells_[1]) * iz);
}

double CartesianMesh::vertex_coordinate(int axis, int i) const {
  return extents_[axis] * double(i) / double(cells_[axis]);
}

std::array<double, 3> CartesianMesh::vertex(std::size_t v) const {
  const std::size_t nx = cells_[0] + 1, ny = cells_[1] + 1;
  const int i = int(v % nx), j = int((v / nx) % ny), k = int(v / (nx * ny));
  return {vertex_coordinate(0, i), vertex_coordinate(1, j), vertex_coordinate(2, k)};
}

std::array<std::array<double, 3>, 8> CartesianMesh::cell_corners(std::size_t cell) const {
  const auto c = cell_coords(cell);
  std::array<std::array<double, 3>, 8> out{};
  for (int corner = 0; corner < 8; ++corner) {
    const int di = corner & 1, dj = (corner >> 1) & 1, dk = (corner >> 2) & 1;
    out[corner] = {vertex_coordinate(0, c[0] + di), vertex_coordinate(1, c[1] + dj),
                   vertex_coordinate(2, c[2] + dk)};
  }
  return out;
}

std::array<double, 3> CartesianMesh::cell_size() const {
  return {extents_[0] / cells_[0], extents_[1] / cells_[1], extents_[2] / cells_[2]};
}

bool CartesianMesh::cell_on_face(std::size_t cell, BoxFace face) const {
  const auto c = cell_coords(cell);
  const int axis = int(face) / 2;
  const bool upper = int(face) % 2 == 1;
  return upper ? c[axis] == cells_[axis] - 1 : c[axis] == 0;
}

CartesianMesh build_cartesian_mesh(std::array<double, 3> extents,
                                   std::array<int, 3> cells_per_axis) {
  return CartesianMesh(extents, cells_per_axis, 0);
}

CartesianMesh refine_uniform(const CartesianMesh& mesh) {
  const auto& c = mesh.cells_per_axis();
  return CartesianMesh(mesh.extents(), {2 * c[0], 2 * c[1], 2 * c[2]}, mesh.level() + 1);
}

} // namespace elast
