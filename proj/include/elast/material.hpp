#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace elast {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// [e11, e22, e33, 2 e23, 2 e13, 2 e12] (engineering shear convention).
struct VoigtStrain {
  std::array<double, 6> v{};
  double operator[](int i) const { return v[i]; }
  bool operator==(const VoigtStrain&) const = default;
};

/// [s11, s22, s33, s23, s13, s12].
struct VoigtStress {
  std::array<double, 6> v{};
  double operator[](int i) const { return v[i]; }
  bool operator==(const VoigtStress&) const = default;
};

struct Isotropic {
  double lambda = 1.0;
  double mu = 1.0;
};

/// General symmetric positive definite 6x6 stiffness, row-major.
struct Anisotropic {
  std::array<double, 36> c{};
};

using VoigtMaterial = std::variant<Isotropic, Anisotropic>;

/// Throws InvalidArgument unless mu > 0 and 3 lambda + 2 mu > 0.
Isotropic make_isotropic(double lambda, double mu);
/// Throws InvalidArgument unless C is symmetric (1e-14) and positive definite.
Anisotropic make_anisotropic(const std::array<double, 36>& c);
Anisotropic anisotropic_from_upper_triangle(std::span<const double> upper21);
Anisotropic anisotropic_from_isotropic(const Isotropic& iso);
/// Reads 21 upper-triangle values (row by row) from a text file; '#' starts
/// a comment, separators may be whitespace or commas.
Anisotropic read_anisotropic_config(const std::string& path);

void validate(const VoigtMaterial& m);
std::array<double, 36> stiffness_matrix(const VoigtMaterial& m);
bool is_isotropic(const VoigtMaterial& m);

// Counted floating-point operations (FMA = 2) of the pointwise kernels below.
inline constexpr int kStrainFlops = 3;
inline constexpr int kIsotropicVoigtFlops = 13;
inline constexpr int kDenseVoigtFlops = 72;
inline constexpr int kFullTensorStressFlops = 34;

/// Row-major gradient g[c*3+a] = d u_c / d x_a.
inline void strain_from_grad(const double* g, double* e) {
  e[0] = g[0];
  e[1] = g[4];
  e[2] = g[8];
  e[3] = g[5] + g[7];
  e[4] = g[2] + g[6];
  e[5] = g[1] + g[3];
}

/// Isotropic Hooke law in Voigt form using only the non-zero pattern.
inline void voigt_stress_isotropic(const double* e, double lambda, double mu, double* s) {
  const double tr = e[0] + e[1] + e[2];
  const double lt = lambda * tr;
  const double two_mu = 2.0 * mu;
  s[0] = lt + two_mu * e[0];
  s[1] = lt + two_mu * e[1];
  s[2] = lt + two_mu * e[2];
  s[3] = mu * e[3];
  s[4] = mu * e[4];
  s[5] = mu * e[5];
}

inline void voigt_stress_dense(const double* e, const double* c, double* s) {
  for (int i = 0; i < 6; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 6; ++j) acc += c[6 * i + j] * e[j];
    s[i] = acc;
  }
}

inline void voigt_stress_any(const double* e, const VoigtMaterial& m, double* s) {
  if (const auto* iso = std::get_if<Isotropic>(&m)) {
    voigt_stress_isotropic(e, iso->lambda, iso->mu, s);
  } else {
    voigt_stress_dense(e, std::get<Anisotropic>(m).c.data(), s);
  }
}

/// Full 3x3 Hooke stress from a row-major gradient, written the long way:
/// eps = (g + g^T)/2, sigma = lambda tr(eps) I + 2 mu eps.
inline void full_tensor_stress(const double* g, double lambda, double mu, double* sigma) {
  double eps[9];
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) eps[3 * c + a] = 0.5 * (g[3 * c + a] + g[3 * a + c]);
  }
  const double lt = lambda * (eps[0] + eps[4] + eps[8]);
  const double two_mu = 2.0 * mu;
  for (int i = 0; i < 9; ++i) sigma[i] = two_mu * eps[i];
  sigma[0] += lt;
  sigma[4] += lt;
  sigma[8] += lt;
}

inline void voigt_to_tensor(const double* s, double* sigma) {
  sigma[0] = s[0];
  sigma[4] = s[1];
  sigma[8] = s[2];
  sigma[5] = sigma[7] = s[3];
  sigma[2] = sigma[6] = s[4];
  sigma[1] = sigma[3] = s[5];
}

VoigtStrain strain_from_grad(const Mat3& grad);
VoigtStress voigt_stress(const VoigtStrain& strain, const VoigtMaterial& mat);
Mat3 stress_full_tensor(const Mat3& grad, double lambda, double mu);
Mat3 voigt_to_tensor(const VoigtStress& s);

/// Index of the Voigt component holding the (i,j) tensor entry.
constexpr int voigt_index(int i, int j) {
  if (i == j) return i;
  return 6 - i - j;
}

/// Material data over a mesh: constant, per element, or per quadrature point.
class MaterialField {
public:
  enum class Scope { Constant, PerElement, PerPoint };

  MaterialField() : values_{Isotropic{}} {}

  static MaterialField constant(VoigtMaterial m);
  static MaterialField per_element(std::vector<VoigtMaterial> per_element);
  static MaterialField per_point(std::vector<VoigtMaterial> values, int points_per_element);

  Scope scope() const { return scope_; }
  const VoigtMaterial& at(std::size_t element, std::size_t point) const {
    switch (scope_) {
    case Scope::Constant: return values_[0];
    case Scope::PerElement: return values_[element];
    default: return values_[element * points_per_element_ + point];
    }
  }
  /// Checks that the field covers a mesh with the given sizes.
  void check_compatible(std::size_t num_elements, std::size_t points_per_element) const;
  /// Number of (element, point) pairs that use the isotropic path.
  std::size_t count_isotropic(std::size_t num_elements, std::size_t points_per_element) const;

private:
  Scope scope_ = Scope::Constant;
  std::vector<VoigtMaterial> values_;
  std::size_t points_per_element_ = 0;
};

} // namespace elast
