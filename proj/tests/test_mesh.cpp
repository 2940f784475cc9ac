#include <gtest/gtest.h>

#include "elast/errors.hpp"
#include "elast/mesh.hpp"

using namespace elast;

TEST(Mesh, CountsForUnitCube) {
  const auto m = build_cartesian_mesh({1, 1, 1}, {2, 2, 2});
  EXPECT_EQ(m.num_cells(), 8u);
  EXPECT_EQ(m.num_vertices(), 27u);
  EXPECT_EQ(m.num_boundary_faces(), 24u);
}

TEST(Mesh, AnisotropicCounts) {
  const auto m = build_cartesian_mesh({2, 1, 1}, {3, 1, 1});
  EXPECT_EQ(m.num_cells(), 3u);
  EXPECT_EQ(m.num_vertices(), 16u);
  EXPECT_DOUBLE_EQ(m.cell_size()[0], 2.0 / 3.0);
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(build_cartesian_mesh({1, 1, 1}, {0, 1, 1}), InvalidArgument);
  EXPECT_THROW(build_cartesian_mesh({1, -1, 1}, {1, 1, 1}), InvalidArgument);
}

TEST(Mesh, RefinementDoublesAndNests) {
  const auto coarse = build_cartesian_mesh({1, 2, 3}, {2, 3, 1});
  const auto fine = refine_uniform(coarse);
  EXPECT_EQ(fine.num_cells(), 8 * coarse.num_cells());
  EXPECT_EQ(fine.level(), coarse.level() + 1);
  EXPECT_EQ(fine.extents(), coarse.extents());
  for (int axis = 0; axis < 3; ++axis) {
    for (int i = 0; i <= coarse.cells_per_axis()[axis]; ++i) {
      EXPECT_EQ(fine.vertex_coordinate(axis, 2 * i), coarse.vertex_coordinate(axis, i));
    }
  }
}

TEST(Mesh, CellIndexRoundTrip) {
  const auto m = build_cartesian_mesh({1, 1, 1}, {3, 2, 4});
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto ijk = m.cell_coords(c);
    EXPECT_EQ(m.cell_index(ijk[0], ijk[1], ijk[2]), c);
  }
  const auto corners = m.cell_corners(m.cell_index(2, 1, 3));
  EXPECT_DOUBLE_EQ(corners[0][0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(corners[7][2], 1.0);
}

TEST(Mesh, FaceMembership) {
  const auto m = build_cartesian_mesh({1, 1, 1}, {2, 2, 2});
  EXPECT_TRUE(m.cell_on_face(0, BoxFace::XMin));
  EXPECT_FALSE(m.cell_on_face(0, BoxFace::XMax));
  EXPECT_TRUE(m.cell_on_face(7, BoxFace::ZMax));
}
