#include <gtest/gtest.h>

#include "elast/errors.hpp"
#include "elast/material.hpp"

#include <cmath>
#include <fstream>
#include <random>

using namespace elast;

namespace {

Mat3 random_grad(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat3 g{};
  for (auto& row : g) {
    for (auto& v : row) v = u(rng);
  }
  return g;
}

} // namespace

TEST(Material, StrainExamples) {
  EXPECT_EQ(strain_from_grad(Mat3{}).v, (std::array<double, 6>{}));
  Mat3 g{};
  g[0][1] = 1;
  EXPECT_EQ(strain_from_grad(g).v, (std::array<double, 6>{0, 0, 0, 0, 0, 1}));
  Mat3 id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  EXPECT_EQ(strain_from_grad(id).v, (std::array<double, 6>{1, 1, 1, 0, 0, 0}));
}

TEST(Material, StressExamples) {
  const VoigtStrain e{{1, 1, 1, 0, 0, 0}};
  EXPECT_EQ(voigt_stress(e, Isotropic{1, 1}).v, (std::array<double, 6>{5, 5, 5, 0, 0, 0}));
  const VoigtStrain shear{{0, 0, 0, 1, 0, 0}};
  EXPECT_EQ(voigt_stress(shear, Isotropic{1, 2}).v, (std::array<double, 6>{0, 0, 0, 2, 0, 0}));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const Isotropic iso{2, 3};
  const VoigtMaterial aniso = anisotropic_from_isotropic(iso);
  for (int t = 0; t < 100; ++t) {
    VoigtStrain s;
    for (auto& v : s.v) v = u(rng);
    const auto a = voigt_stress(s, iso);
    const auto b = voigt_stress(s, aniso);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(a[i], b[i], 1e-15 * 20);
  }
}

TEST(Material, FullTensorExamples) {
  Mat3 id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const auto s = stress_full_tensor(id, 1, 1);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(s[i][j], i == j ? 5.0 : 0.0);
  }
  Mat3 rot{{{0, 1, -2}, {-1, 0, 3}, {2, -3, 0}}};
  const auto z = stress_full_tensor(rot, 1.5, 0.7);
  for (const auto& row : z) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
}

TEST(Material, VoigtMatchesFullTensor) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const auto g = random_grad(rng);
    const double lambda = 0.5 + t % 7, mu = 0.3 + t % 5;
    const auto full = stress_full_tensor(g, lambda, mu);
    const auto e = strain_from_grad(g);
    const auto a = voigt_to_tensor(voigt_stress(e, Isotropic{lambda, mu}));
    const auto b = voigt_to_tensor(voigt_stress(e, anisotropic_from_isotropic({lambda, mu})));
    double scale = 0;
    for (const auto& row : full) {
      for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(a[i][j], full[i][j], 1e-14 * scale);
        EXPECT_NEAR(b[i][j], full[i][j], 1e-14 * scale);
      }
    }
  }
}

TEST(Material, EnergyPositive) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const Isotropic iso{-0.5, 1.0};
  std::array<double, 21> upper{};
  // Diagonally dominant random SPD matrix.
  int k = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) upper[k++] = i == j ? 10.0 : u(rng);
  }
  const VoigtMaterial aniso = anisotropic_from_upper_triangle(upper);
  for (int t = 0; t < 200; ++t) {
    VoigtStrain e;
    for (auto& v : e.v) v = u(rng);
    for (const VoigtMaterial& m : {VoigtMaterial(iso), aniso}) {
      const auto s = voigt_stress(e, m);
      double energy = 0;
      for (int i = 0; i < 6; ++i) energy += e[i] * s[i];
      EXPECT_GT(energy, 0.0);
    }
  }
}

TEST(Material, IsotropicFlopsAtMostHalfOfDense) {
  EXPECT_LE(2 * kIsotropicVoigtFlops, kDenseVoigtFlops);
}

TEST(Material, Validation) {
  EXPECT_THROW(make_isotropic(1, 0), InvalidArgument);
  EXPECT_THROW(make_isotropic(-1, 1), InvalidArgument);
  EXPECT_NO_THROW(make_isotropic(-0.5, 1));
  std::array<double, 36> c = anisotropic_from_isotropic({1, 1}).c;
  c[1] += 1e-10;
  EXPECT_THROW(make_anisotropic(c), InvalidArgument);
  std::array<double, 36> neg{};
  for (int i = 0; i < 6; ++i) neg[7 * i] = i == 3 ? -1.0 : 1.0;
  EXPECT_THROW(make_anisotropic(neg), InvalidArgument);
  EXPECT_THROW(anisotropic_from_upper_triangle(std::vector<double>(20, 1.0)), InvalidArgument);
}

TEST(Material, ConfigFile) {
  const std::string path = ::testing::TempDir() + "elast_material.txt";
  {
    std::ofstream out(path);
    out << "# isotropic lambda=1 mu=1\n3, 1, 1, 0, 0, 0\n3 1 0 0 0\n3 0 0 0\n1 0 0\n1 0\n1\n";
  }
  const auto a = read_anisotropic_config(path);
  EXPECT_EQ(a.c, anisotropic_from_isotropic({1, 1}).c);
  EXPECT_THROW(read_anisotropic_config(path + ".missing"), InvalidArgument);
}

TEST(Material, FieldScopes) {
  const auto c = MaterialField::constant(Isotropic{1, 1});
  EXPECT_EQ(c.count_isotropic(4, 8), 32u);
  const auto pe = MaterialField::per_element(
      {Isotropic{1, 1}, anisotropic_from_isotropic({1, 1}), Isotropic{2, 2}});
  EXPECT_EQ(pe.count_isotropic(3, 8), 16u);
  EXPECT_THROW(pe.check_compatible(4, 8), InvalidArgument);
  const auto pp = MaterialField::per_point(std::vector<VoigtMaterial>(16, Isotropic{1, 1}), 8);
  EXPECT_NO_THROW(pp.check_compatible(2, 8));
  EXPECT_THROW(pp.check_compatible(2, 27), InvalidArgument);
  EXPECT_EQ(std::get<Isotropic>(pe.at(2, 5)).mu, 2.0);
}
