#include "elast/material.hpp"

#include "elast/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace elast {

Isotropic make_isotropic(double lambda, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("shear modulus mu must be positive");
  if (!(3.0 * lambda + 2.0 * mu > 0.0)) {
    throw InvalidArgument("bulk modulus 3*lambda + 2*mu must be positive");
  }
  return {lambda, mu};
}

Anisotropic make_anisotropic(const std::array<double, 36>& c) {
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      const double scale = std::max({std::abs(c[6 * i + j]), std::abs(c[6 * j + i]), 1.0});
      if (std::abs(c[6 * i + j] - c[6 * j + i]) > 1e-14 * scale) {
        throw InvalidArgument("anisotropic stiffness matrix is not symmetric");
      }
    }
  }
  // Cholesky attempt.
  std::array<double, 36> l{};
  for (int j = 0; j < 6; ++j) {
    double d = c[6 * j + j];
    for (int k = 0; k < j; ++k) d -= l[6 * j + k] * l[6 * j + k];
    if (!(d > 0.0)) throw InvalidArgument("anisotropic stiffness matrix is not positive definite");
    l[6 * j + j] = std::sqrt(d);
    for (int i = j + 1; i < 6; ++i) {
      double s = c[6 * i + j];
      for (int k = 0; k < j; ++k) s -= l[6 * i + k] * l[6 * j + k];
      l[6 * i + j] = s / l[6 * j + j];
    }
  }
  return {c};
}

Anisotropic anisotropic_from_upper_triangle(std::span<const double> upper21) {
  if (upper21.size() != 21) {
    throw InvalidArgument("anisotropic stiffness needs 21 upper-triangle values, got " +
                          std::to_string(upper21.size()));
  }
  std::array<double, 36> c{};
  std::size_t k = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) {
      c[6 * i + j] = upper21[k];
      c[6 * j + i] = upper21[k];
      ++k;
    }
  }
  return make_anisotropic(c);
}

Anisotropic anisotropic_from_isotropic(const Isotropic& iso) {
  std::array<double, 36> c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c[6 * i + j] = iso.lambda;
    c[6 * i + i] = iso.lambda + 2.0 * iso.mu;
    c[6 * (i + 3) + (i + 3)] = iso.mu;
  }
  return {c};
}

Anisotropic read_anisotropic_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open material config '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line) {
      if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InvalidArgument("material config '" + path + "': bad number '" + tok + "'");
      }
    }
  }
  return anisotropic_from_upper_triangle(values);
}

void validate(const VoigtMaterial& m) {
  if (const auto* iso = std::get_if<Isotropic>(&m)) {
    make_isotropic(iso->lambda, iso->mu);
  } else {
    make_anisotropic(std::get<Anisotropic>(m).c);
  }
}

std::array<double, 36> stiffness_matrix(const VoigtMaterial& m) {
  if (const auto* iso = std::get_if<Isotropic>(&m)) return anisotropic_from_isotropic(*iso).c;
  return std::get<Anisotropic>(m).c;
}

bool is_isotropic(const VoigtMaterial& m) { return std::holds_alternative<Isotropic>(m); }

VoigtStrain strain_from_grad(const Mat3& grad) {
  double g[9];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g[3 * i + j] = grad[i][j];
  }
  VoigtStrain e;
  strain_from_grad(g, e.v.data());
  return e;
}

VoigtStress voigt_stress(const VoigtStrain& strain, const VoigtMaterial& mat) {
  VoigtStress s;
  voigt_stress_any(strain.v.data(), mat, s.v.data());
  return s;
}

Mat3 stress_full_tensor(const Mat3& grad, double lambda, double mu) {
  double g[9], sigma[9];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g[3 * i + j] = grad[i][j];
  }
  full_tensor_stress(g, lambda, mu, sigma);
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = sigma[3 * i + j];
  }
  return out;
}

Mat3 voigt_to_tensor(const VoigtStress& s) {
  double sigma[9];
  voigt_to_tensor(s.v.data(), sigma);
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = sigma[3 * i + j];
  }
  return out;
}

MaterialField MaterialField::constant(VoigtMaterial m) {
  validate(m);
  MaterialField f;
  f.scope_ = Scope::Constant;
  f.values_ = {std::move(m)};
  return f;
}

MaterialField MaterialField::per_element(std::vector<VoigtMaterial> per_element) {
  for (const auto& m : per_element) validate(m);
  MaterialField f;
  f.scope_ = Scope::PerElement;
  f.values_ = std::move(per_element);
  return f;
}

MaterialField MaterialField::per_point(std::vector<VoigtMaterial> values, int points_per_element) {
  if (points_per_element < 1 || values.size() % std::size_t(points_per_element) != 0) {
    throw InvalidArgument("per-point material size is not a multiple of the points per element");
  }
  for (const auto& m : values) validate(m);
  MaterialField f;
  f.scope_ = Scope::PerPoint;
  f.values_ = std::move(values);
  f.points_per_element_ = std::size_t(points_per_element);
  return f;
}

void MaterialField::check_compatible(std::size_t num_elements,
                                     std::size_t points_per_element) const {
  switch (scope_) {
  case Scope::Constant: return;
  case Scope::PerElement:
    if (values_.size() != num_elements) {
      throw InvalidArgument("per-element material does not match the element count");
    }
    return;
  case Scope::PerPoint:
    if (points_per_element_ != points_per_element ||
        values_.size() != num_elements * points_per_element) {
      throw InvalidArgument("per-point material does not match the quadrature layout");
    }
    return;
  }
}

std::size_t MaterialField::count_isotropic(std::size_t num_elements,
                                           std::size_t points_per_element) const {
  std::size_t count = 0;
  switch (scope_) {
  case Scope::Constant:
    return is_isotropic(values_[0]) ? num_elements * points_per_element : 0;
  case Scope::PerElement:
    for (const auto& m : values_) count += is_isotropic(m) ? points_per_element : 0;
    return count;
  case Scope::PerPoint:
    for (const auto& m : values_) count += is_isotropic(m) ? 1 : 0;
    return count;
  }
  return count;
}

} // namespace elast
