#include "elast/operators.hpp"

#include "elast/errors.hpp"
#include "elast/sumfac.hpp"

#include <algorithm>
#include <cmath>

namespace elast {

namespace {

// Runs body(element, scratch) over all elements, one color at a time, with the
// elements of a color distributed over threads. Colors never share a DOF and
// are always visited in the same order, so results do not depend on the
// thread count.
template <class MakeScratch, class Body>
void colored_loop(const FESpace& space, MakeScratch make_scratch, Body body) {
  for (const auto& color : space.element_colors()) {
    const auto m = std::int64_t(color.size());
#pragma omp parallel
    {
      auto scratch = make_scratch();
#pragma omp for schedule(static)
      for (std::int64_t k = 0; k < m; ++k) body(color[std::size_t(k)], scratch);
    }
  }
}

// Same, for element-local work without scatter conflicts.
template <class MakeScratch, class Body>
void element_loop(std::size_t num_elements, MakeScratch make_scratch, Body body) {
  const auto m = std::int64_t(num_elements);
#pragma omp parallel
  {
    auto scratch = make_scratch();
#pragma omp for schedule(static)
    for (std::int64_t e = 0; e < m; ++e) body(std::size_t(e), scratch);
  }
}

// g[3c+a] = sum_m ref[3c+m] JinvT[3a+m]
inline void physical_gradient(const double* ref, const double* jit, double* g) {
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) {
      g[3 * c + a] = ref[3 * c] * jit[3 * a] + ref[3 * c + 1] * jit[3 * a + 1] +
                     ref[3 * c + 2] * jit[3 * a + 2];
    }
  }
}

// F[3c+m] = sum_a sigma[3c+a] JinvT[3a+m]
inline void stress_times_jinvt(const double* sigma, const double* jit, double* f) {
  for (int c = 0; c < 3; ++c) {
    for (int m = 0; m < 3; ++m) {
      f[3 * c + m] = sigma[3 * c] * jit[m] + sigma[3 * c + 1] * jit[3 + m] +
                     sigma[3 * c + 2] * jit[6 + m];
    }
  }
}

// Full-tensor stress of the baseline kernel: the long-hand Hooke law for
// isotropic points, the dense Voigt product re-expanded otherwise.
inline void baseline_stress(const double* g, const VoigtMaterial& m, double* sigma) {
  if (const auto* iso = std::get_if<Isotropic>(&m)) {
    full_tensor_stress(g, iso->lambda, iso->mu, sigma);
  } else {
    double e[6], s[6];
    strain_from_grad(g, e);
    voigt_stress_dense(e, std::get<Anisotropic>(m).c.data(), s);
    voigt_to_tensor(s, sigma);
  }
}

// Transformed stress w detJ sigma J^{-T} written over the gradient.
inline void baseline_pointwise(double* qv, const VoigtMaterial& m, double wdet, const double* jit) {
  double sigma[9];
  baseline_stress(qv, m, sigma);
  stress_times_jinvt(sigma, jit, qv);
  for (int k = 0; k < 9; ++k) qv[k] *= wdet;
}

// Per-axis lattice ranges touched by the elements containing each lattice index.
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

// C[V(c,a)][V(d,b)] for all (c,a,d,b), index ((c*3+a)*3+d)*3+b.
std::array<double, 81> full_stiffness(const VoigtMaterial& m) {
  const auto C = stiffness_matrix(m);
  std::array<double, 81> out{};
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) {
      for (int d = 0; d < 3; ++d) {
        for (int b = 0; b < 3; ++b) {
          out[((c * 3 + a) * 3 + d) * 3 + b] = C[6 * voigt_index(c, a) + voigt_index(d, b)];
        }
      }
    }
  }
  return out;
}

} // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
  case Variant::FA: return "fa";
  case Variant::PA: return "pa";
  case Variant::PASumFac: return "pa-sumfac";
  case Variant::PAVoigt: return "pa-voigt";
  case Variant::PAop: return "paop";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::FA, Variant::PA, Variant::PASumFac, Variant::PAVoigt, Variant::PAop}) {
    if (variant_name(v) == name) return v;
  }
  throw InvalidArgument("unknown operator variant '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Closed-form counters

std::uint64_t fa_nnz(const FESpace& space) {
  std::uint64_t nnz = 9;
  const auto& cells = space.mesh().cells_per_axis();
  for (int axis = 0; axis < 3; ++axis) {
    const auto ap = axis_pattern(cells[axis], space.order());
    std::uint64_t s = 0;
    for (int w : ap.width) s += std::uint64_t(w);
    nnz *= s;
  }
  return nnz;
}

namespace {

constexpr std::uint64_t kPhysGradFlops = 54;
constexpr std::uint64_t kTransformFlops = 64;  // w detJ, sigma J^{-T}, scaling
constexpr std::uint64_t kScaleVoigtFlops = 7;
constexpr std::uint64_t kExpandFlops = 54;

std::uint64_t baseline_point_flops(bool isotropic) {
  const std::uint64_t stress =
      isotropic ? kFullTensorStressFlops : kStrainFlops + kDenseVoigtFlops;
  return stress + kTransformFlops;
}

std::uint64_t voigt_point_flops(bool isotropic) {
  const std::uint64_t stress = isotropic ? kIsotropicVoigtFlops : kDenseVoigtFlops;
  return kPhysGradFlops + kStrainFlops + stress + kScaleVoigtFlops + kExpandFlops;
}

} // namespace

std::uint64_t element_flops(Variant v, int p, int q) {
  const std::uint64_t n3 = std::uint64_t(p + 1) * (p + 1) * (p + 1);
  const std::uint64_t Q = std::uint64_t(q) * q * q;
  const std::uint64_t S = sumfac_fma_count(p, q);
  switch (v) {
  case Variant::PA: return Q * (18 * n3 + kPhysGradFlops) + Q * baseline_point_flops(true) +
                           18 * n3 * Q + 3 * n3;
  case Variant::PASumFac: return 12 * S + Q * (kPhysGradFlops + baseline_point_flops(true)) + 3 * n3;
  case Variant::PAVoigt:
  case Variant::PAop: return 12 * S + Q * voigt_point_flops(true) + 3 * n3;
  case Variant::FA: break;
  }
  throw InvalidArgument("element_flops is not defined for the assembled variant");
}

ApplyCost apply_cost(Variant v, const FESpace& space, int q, std::uint64_t isotropic_points) {
  const std::uint64_t N = space.vector_ndof();
  const std::uint64_t nel = space.num_elements();
  const std::uint64_t Q = std::uint64_t(q) * q * q;
  const std::uint64_t n3 = std::uint64_t(space.dofs_per_element());
  const std::uint64_t aniso = nel * Q - std::min(nel * Q, isotropic_points);
  ApplyCost cost;
  if (v == Variant::FA) {
    const std::uint64_t nnz = fa_nnz(space);
    cost.flops = 2 * nnz;
    cost.bytes = 8 * (N + 1) + 12 * nnz + 16 * N;
    return cost;
  }
  cost.flops = nel * element_flops(v, space.order(), q);
  const bool voigt = v == Variant::PAVoigt || v == Variant::PAop;
  const std::uint64_t delta =
      voigt ? voigt_point_flops(false) - voigt_point_flops(true)
            : baseline_point_flops(false) - baseline_point_flops(true);
  cost.flops += aniso * delta;

  cost.bytes = 16 * N;
  switch (v) {
  case Variant::PA:
    // G streamed by both contracting kernels; QVec written, read+written, read.
    cost.bytes += nel * 2 * 8 * 3 * n3 * Q + nel * Q * 8 * (9 * 4 + 19);
    break;
  case Variant::PASumFac: cost.bytes += nel * Q * 8 * (9 * 4 + 19); break;
  case Variant::PAVoigt: cost.bytes += nel * Q * 8 * (6 * 4 + 19); break;
  case Variant::PAop: cost.bytes += nel * Q * 8 * 10; break;
  case Variant::FA: break;
  }
  return cost;
}

std::uint64_t operator_storage_bytes(Variant v, const FESpace& space, int q) {
  const std::uint64_t N = space.vector_ndof();
  const std::uint64_t nel = space.num_elements();
  const std::uint64_t Q = std::uint64_t(q) * q * q;
  const std::uint64_t n1 = std::uint64_t(space.order()) + 1;
  const std::uint64_t n3 = n1 * n1 * n1;
  const std::uint64_t geometry = 8 * (nel * Q * GeometryFactors::kValuesPerPoint + Q);
  const std::uint64_t tables = 8 * 2 * std::uint64_t(q) * n1;
  switch (v) {
  case Variant::FA: return 8 * (N + 1) + 12 * fa_nnz(space);
  case Variant::PA: return 8 * 3 * n3 * Q + 8 * 9 * Q * nel + geometry;
  case Variant::PASumFac: return tables + 8 * 9 * Q * nel + geometry;
  case Variant::PAVoigt: return tables + 8 * 6 * Q * nel + geometry;
  case Variant::PAop: return tables + geometry;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Setup

ElasticOperator::ElasticOperator(Variant v, const FESpace& space, const MaterialField& material,
                                 const QuadRule1D& rule)
    : variant_(v), space_(space), material_(material),
      basis_(eval_basis_matrices(space.order(), rule)),
      geom_(compute_geometry_factors(space, rule)) {
  const std::size_t Q = std::size_t(geom_.points_per_element());
  material_.check_compatible(space_.num_elements(), Q);
  cost_ = apply_cost(v, space_, rule.size(), material_.count_isotropic(space_.num_elements(), Q));
  switch (v) {
  case Variant::FA: matrix_ = assemble_matrix(space_, material_, geom_, basis_); break;
  case Variant::PA:
    gtable_ = build_gradient_table(basis_);
    qvec_.assign(9 * Q * space_.num_elements(), 0.0);
    break;
  case Variant::PASumFac: qvec_.assign(9 * Q * space_.num_elements(), 0.0); break;
  case Variant::PAVoigt: qvec_.assign(6 * Q * space_.num_elements(), 0.0); break;
  case Variant::PAop: break;
  }
}

ElasticOperator::~ElasticOperator() = default;

std::unique_ptr<ElasticOperator> make_operator(Variant v, const FESpace& space,
                                               const MaterialField& material,
                                               const QuadRule1D& rule) {
  return std::unique_ptr<ElasticOperator>(new ElasticOperator(v, space, material, rule));
}

std::unique_ptr<ElasticOperator> make_operator(Variant v, const FESpace& space,
                                               const MaterialField& material) {
  return make_operator(v, space, material, gauss_legendre_rule(space.order() + 1));
}

std::unique_ptr<ElasticOperator> assemble_fa(const FESpace& space, const MaterialField& material,
                                             const QuadRule1D& rule) {
  return make_operator(Variant::FA, space, material, rule);
}

std::size_t ElasticOperator::storage_bytes() const {
  if (matrix_) return matrix_->storage_bytes();
  std::size_t bytes = geom_.storage_bytes() + 8 * (gtable_.size() + qvec_.size());
  if (variant_ != Variant::PA) bytes += 8 * (basis_.B.size() + basis_.D.size());
  return bytes;
}

CounterReport ElasticOperator::counters() const {
  CounterReport r;
  r.applications = applications_.load();
  r.flops = r.applications * cost_.flops;
  r.bytes_model = r.applications * cost_.bytes;
  return r;
}

void ElasticOperator::reset_counters() const { applications_.store(0); }

void ElasticOperator::add_mult(std::span<const double> x, std::span<double> y) const {
  if (x.size() != size() || y.size() != size()) {
    throw InvalidArgument("operator apply: vector length mismatch");
  }
  switch (variant_) {
  case Variant::FA: apply_fa(x, y); break;
  case Variant::PA: apply_pa(x, y); break;
  case Variant::PASumFac: apply_pa_sumfac(x, y); break;
  case Variant::PAVoigt: apply_pa_voigt(x, y); break;
  case Variant::PAop: apply_fused(x, y); break;
  }
  applications_.fetch_add(1);
}

void apply_pa_baseline(const ElasticOperator& op, std::span<const double> x, std::span<double> y) {
  if (op.variant() != Variant::PA) throw InvalidArgument("operator is not the PA baseline");
  op.add_mult(x, y);
}

void apply_paop(const ElasticOperator& op, std::span<const double> x, std::span<double> y) {
  if (op.variant() != Variant::PAop) throw InvalidArgument("operator is not PAop");
  op.add_mult(x, y);
}

// ---------------------------------------------------------------------------
// Kernels

void ElasticOperator::apply_fa(std::span<const double> x, std::span<double> y) const {
  matrix_->add_mult(x, y);
}

void ElasticOperator::apply_pa(std::span<const double> x, std::span<double> y) const {
  const int n3 = space_.dofs_per_element();
  const int Q = geom_.points_per_element();
  const double* G = gtable_.data();
  double* qv = qvec_.data();

  // Physical gradients from the dense G table.
  element_loop(
      space_.num_elements(), [&] { return std::vector<double>(3 * std::size_t(n3)); },
      [&](std::size_t e, std::vector<double>& xe) {
        space_.gather(e, x, xe);
        for (int qp = 0; qp < Q; ++qp) {
          double ref[9];
          for (int c = 0; c < 3; ++c) {
            for (int m = 0; m < 3; ++m) {
              const double* g = G + (std::size_t(qp) * 3 + m) * n3;
              const double* u = xe.data() + std::size_t(c) * n3;
              double acc = 0.0;
              for (int i = 0; i < n3; ++i) acc += g[i] * u[i];
              ref[3 * c + m] = acc;
            }
          }
          physical_gradient(ref, geom_.JinvT(e, qp), qv + (e * Q + qp) * 9);
        }
      });

  // Kernel 1: stress and transformation at every quadrature point.
  element_loop(
      space_.num_elements(), [] { return 0; },
      [&](std::size_t e, int) {
        for (int qp = 0; qp < Q; ++qp) {
          const double wdet = geom_.weight(qp) * geom_.detJ(e, qp);
          baseline_pointwise(qv + (e * Q + qp) * 9, material_.at(e, qp), wdet,
                             geom_.JinvT(e, qp));
        }
      });

  // Kernel 2: contraction against G.
  colored_loop(
      space_, [&] { return std::vector<double>(3 * std::size_t(n3)); },
      [&](std::size_t e, std::vector<double>& ye) {
        std::fill(ye.begin(), ye.end(), 0.0);
        for (int qp = 0; qp < Q; ++qp) {
          const double* f = qv + (e * Q + qp) * 9;
          for (int m = 0; m < 3; ++m) {
            const double* g = G + (std::size_t(qp) * 3 + m) * n3;
            for (int c = 0; c < 3; ++c) {
              const double s = f[3 * c + m];
              double* out = ye.data() + std::size_t(c) * n3;
              for (int i = 0; i < n3; ++i) out[i] += s * g[i];
            }
          }
        }
        space_.scatter_add(e, ye, y);
      });
}

namespace {

struct SlicedScratch {
  explicit SlicedScratch(const Basis1D& basis)
      : slice(basis), xe(3 * std::size_t(basis.num_dofs()) * basis.num_dofs() * basis.num_dofs()),
        ye(xe.size()), slab(9 * std::size_t(basis.num_qpts()) * basis.num_qpts()) {}

  SliceScratch slice;
  std::vector<double> xe, ye;
  std::vector<double> slab;  // 9 q^2: one value per (component, direction) and slice point
};

// Reference gradients of all three components on slice qz into s.slab.
inline void forward_slice(const Basis1D& basis, int qz, const double* xe, SlicedScratch& s) {
  const int n = basis.num_dofs();
  const std::size_t n3 = std::size_t(n) * n * n;
  const std::size_t q2 = std::size_t(basis.num_qpts()) * basis.num_qpts();
  for (int c = 0; c < 3; ++c) {
    double* base = s.slab.data() + 3 * c * q2;
    grad_slice(basis, qz, xe + c * n3, s.slice, base, base + q2, base + 2 * q2);
  }
}

inline void transpose_slice(const Basis1D& basis, int qz, SlicedScratch& s, double* ye) {
  const int n = basis.num_dofs();
  const std::size_t n3 = std::size_t(n) * n * n;
  const std::size_t q2 = std::size_t(basis.num_qpts()) * basis.num_qpts();
  for (int c = 0; c < 3; ++c) {
    const double* base = s.slab.data() + 3 * c * q2;
    grad_slice_transpose(basis, qz, base, base + q2, base + 2 * q2, s.slice, ye + c * n3);
  }
}

inline void slab_get(const double* slab, std::size_t q2, std::size_t k, double* v9) {
  for (int r = 0; r < 9; ++r) v9[r] = slab[r * q2 + k];
}

inline void slab_set(double* slab, std::size_t q2, std::size_t k, const double* v9) {
  for (int r = 0; r < 9; ++r) slab[r * q2 + k] = v9[r];
}

} // namespace

void ElasticOperator::apply_pa_sumfac(std::span<const double> x, std::span<double> y) const {
  const int q = basis_.num_qpts();
  const std::size_t q2 = std::size_t(q) * q;
  const int Q = geom_.points_per_element();
  double* qv = qvec_.data();

  element_loop(
      space_.num_elements(), [&] { return SlicedScratch(basis_); },
      [&](std::size_t e, SlicedScratch& s) {
        space_.gather(e, x, s.xe);
        for (int qz = 0; qz < q; ++qz) {
          forward_slice(basis_, qz, s.xe.data(), s);
          for (std::size_t k = 0; k < q2; ++k) {
            const int qp = int(qz * q2 + k);
            double ref[9];
            slab_get(s.slab.data(), q2, k, ref);
            physical_gradient(ref, geom_.JinvT(e, qp), qv + (e * Q + qp) * 9);
          }
        }
      });

  element_loop(
      space_.num_elements(), [] { return 0; },
      [&](std::size_t e, int) {
        for (int qp = 0; qp < Q; ++qp) {
          const double wdet = geom_.weight(qp) * geom_.detJ(e, qp);
          baseline_pointwise(qv + (e * Q + qp) * 9, material_.at(e, qp), wdet,
                             geom_.JinvT(e, qp));
        }
      });

  colored_loop(
      space_, [&] { return SlicedScratch(basis_); },
      [&](std::size_t e, SlicedScratch& s) {
        std::fill(s.ye.begin(), s.ye.end(), 0.0);
        for (int qz = 0; qz < q; ++qz) {
          for (std::size_t k = 0; k < q2; ++k) {
            slab_set(s.slab.data(), q2, k, qv + (e * Q + qz * q2 + k) * 9);
          }
          transpose_slice(basis_, qz, s, s.ye.data());
        }
        space_.scatter_add(e, s.ye, y);
      });
}

void ElasticOperator::apply_pa_voigt(std::span<const double> x, std::span<double> y) const {
  const int q = basis_.num_qpts();
  const std::size_t q2 = std::size_t(q) * q;
  const int Q = geom_.points_per_element();
  double* qv = qvec_.data();

  element_loop(
      space_.num_elements(), [&] { return SlicedScratch(basis_); },
      [&](std::size_t e, SlicedScratch& s) {
        space_.gather(e, x, s.xe);
        for (int qz = 0; qz < q; ++qz) {
          forward_slice(basis_, qz, s.xe.data(), s);
          for (std::size_t k = 0; k < q2; ++k) {
            const int qp = int(qz * q2 + k);
            double ref[9], g[9];
            slab_get(s.slab.data(), q2, k, ref);
            physical_gradient(ref, geom_.JinvT(e, qp), g);
            strain_from_grad(g, qv + (e * Q + qp) * 6);
          }
        }
      });

  element_loop(
      space_.num_elements(), [] { return 0; },
      [&](std::size_t e, int) {
        for (int qp = 0; qp < Q; ++qp) {
          double* v = qv + (e * Q + qp) * 6;
          double s[6];
          voigt_stress_any(v, material_.at(e, qp), s);
          const double wdet = geom_.weight(qp) * geom_.detJ(e, qp);
          for (int k = 0; k < 6; ++k) v[k] = wdet * s[k];
        }
      });

  colored_loop(
      space_, [&] { return SlicedScratch(basis_); },
      [&](std::size_t e, SlicedScratch& s) {
        std::fill(s.ye.begin(), s.ye.end(), 0.0);
        for (int qz = 0; qz < q; ++qz) {
          for (std::size_t k = 0; k < q2; ++k) {
            const int qp = int(qz * q2 + k);
            double sigma[9], f[9];
            voigt_to_tensor(qv + (e * Q + qp) * 6, sigma);
            stress_times_jinvt(sigma, geom_.JinvT(e, qp), f);
            slab_set(s.slab.data(), q2, k, f);
          }
          transpose_slice(basis_, qz, s, s.ye.data());
        }
        space_.scatter_add(e, s.ye, y);
      });
}

void ElasticOperator::apply_fused(std::span<const double> x, std::span<double> y) const {
  const int q = basis_.num_qpts();
  const std::size_t q2 = std::size_t(q) * q;
  const std::size_t Q = std::size_t(geom_.points_per_element());

  struct Scratch {
    SlicedScratch sliced;
    std::vector<double> el_qvec;  // 6 Voigt values per point of one element
  };

  colored_loop(
      space_, [&] { return Scratch{SlicedScratch(basis_), std::vector<double>(6 * Q)}; },
      [&](std::size_t e, Scratch& sc) {
        auto& s = sc.sliced;
        double* buf = sc.el_qvec.data();
        space_.gather(e, x, s.xe);
        std::fill(s.ye.begin(), s.ye.end(), 0.0);
        for (int qz = 0; qz < q; ++qz) {
          forward_slice(basis_, qz, s.xe.data(), s);
          for (std::size_t k = 0; k < q2; ++k) {
            const int qp = int(qz * q2 + k);
            double ref[9], g[9], eps[6];
            slab_get(s.slab.data(), q2, k, ref);
            physical_gradient(ref, geom_.JinvT(e, qp), g);
            strain_from_grad(g, eps);
            double* sv = buf + 6 * std::size_t(qp);
            voigt_stress_any(eps, material_.at(e, std::size_t(qp)), sv);
            const double wdet = geom_.weight(qp) * geom_.detJ(e, qp);
            for (int r = 0; r < 6; ++r) sv[r] *= wdet;
          }
        }
        for (int qz = 0; qz < q; ++qz) {
          for (std::size_t k = 0; k < q2; ++k) {
            const int qp = int(qz * q2 + k);
            double sigma[9], f[9];
            voigt_to_tensor(buf + 6 * std::size_t(qp), sigma);
            stress_times_jinvt(sigma, geom_.JinvT(e, qp), f);
            slab_set(s.slab.data(), q2, k, f);
          }
          transpose_slice(basis_, qz, s, s.ye.data());
        }
        space_.scatter_add(e, s.ye, y);
      });
}

// ---------------------------------------------------------------------------
// Diagonal

std::vector<double> ElasticOperator::assemble_diagonal() const {
  if (matrix_) return matrix_->diagonal();
  const int n = basis_.num_dofs();
  const int q = basis_.num_qpts();
  const std::size_t n3 = std::size_t(n) * n * n;
  const int Q = geom_.points_per_element();
  std::vector<double> diag(size(), 0.0);

  // T[k][(m,l)][qk][ik] = (m==k ? D : B)(qk,ik) * (l==k ? D : B)(qk,ik)
  std::array<std::array<std::vector<double>, 9>, 3> T;
  for (int axis = 0; axis < 3; ++axis) {
    for (int m = 0; m < 3; ++m) {
      for (int l = 0; l < 3; ++l) {
        auto& t = T[axis][3 * m + l];
        t.resize(std::size_t(q) * n);
        for (int iq = 0; iq < q; ++iq) {
          for (int i = 0; i < n; ++i) {
            const double f1 = m == axis ? basis_.d(iq, i) : basis_.b(iq, i);
            const double f2 = l == axis ? basis_.d(iq, i) : basis_.b(iq, i);
            t[iq * n + i] = f1 * f2;
          }
        }
      }
    }
  }

  struct Scratch {
    std::vector<double> K, a1, a2, de;
  };
  colored_loop(
      space_,
      [&] {
        return Scratch{std::vector<double>(9 * std::size_t(Q)),
                       std::vector<double>(std::size_t(q) * q * n),
                       std::vector<double>(std::size_t(q) * n * n), std::vector<double>(3 * n3)};
      },
      [&](std::size_t e, Scratch& s) {
        std::fill(s.de.begin(), s.de.end(), 0.0);
        for (int c = 0; c < 3; ++c) {
          for (int qp = 0; qp < Q; ++qp) {
            const auto Cf = full_stiffness(material_.at(e, qp));
            const double* jit = geom_.JinvT(e, qp);
            const double wdet = geom_.weight(qp) * geom_.detJ(e, qp);
            for (int m = 0; m < 3; ++m) {
              for (int l = 0; l < 3; ++l) {
                double acc = 0.0;
                for (int a = 0; a < 3; ++a) {
                  for (int b = 0; b < 3; ++b) {
                    acc += jit[3 * a + m] * Cf[((c * 3 + a) * 3 + c) * 3 + b] * jit[3 * b + l];
                  }
                }
                s.K[std::size_t(qp) * 9 + 3 * m + l] = wdet * acc;
              }
            }
          }
          double* out = s.de.data() + c * n3;
          for (int ml = 0; ml < 9; ++ml) {
            const double* t0 = T[0][ml].data();
            const double* t1 = T[1][ml].data();
            const double* t2 = T[2][ml].data();
            // a1[qz][qy][i0] = sum_qx K(qz,qy,qx) t0[qx][i0]
            for (int qzy = 0; qzy < q * q; ++qzy) {
              double* a = s.a1.data() + std::size_t(qzy) * n;
              std::fill(a, a + n, 0.0);
              for (int qx = 0; qx < q; ++qx) {
                const double kv = s.K[(std::size_t(qzy) * q + qx) * 9 + ml];
                for (int i = 0; i < n; ++i) a[i] += kv * t0[qx * n + i];
              }
            }
            // a2[qz][i1][i0] = sum_qy a1[qz][qy][i0] t1[qy][i1]
            std::fill(s.a2.begin(), s.a2.end(), 0.0);
            for (int qz = 0; qz < q; ++qz) {
              for (int qy = 0; qy < q; ++qy) {
                const double* a = s.a1.data() + (std::size_t(qz) * q + qy) * n;
                for (int j = 0; j < n; ++j) {
                  const double tv = t1[qy * n + j];
                  double* b = s.a2.data() + (std::size_t(qz) * n + j) * n;
                  for (int i = 0; i < n; ++i) b[i] += tv * a[i];
                }
              }
            }
            // out[i2][i1][i0] += sum_qz a2[qz][i1][i0] t2[qz][i2]
            for (int qz = 0; qz < q; ++qz) {
              const double* b = s.a2.data() + std::size_t(qz) * n * n;
              for (int k = 0; k < n; ++k) {
                const double tv = t2[qz * n + k];
                double* o = out + std::size_t(k) * n * n;
                for (int ji = 0; ji < n * n; ++ji) o[ji] += tv * b[ji];
              }
            }
          }
        }
        space_.scatter_add(e, s.de, diag);
      });
  return diag;
}

// ---------------------------------------------------------------------------
// Constrained wrapper

ConstrainedOperator::ConstrainedOperator(const LinearOperator& op, BcConstraint bc)
    : op_(op), bc_(std::move(bc)), fixed_(op.size(), 0) {
  for (auto d : bc_.dofs) {
    if (d >= op.size()) throw InvalidArgument("constrained DOF index out of range");
    fixed_[d] = 1;
  }
}

void ConstrainedOperator::add_mult(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) throw InvalidArgument("constrained apply: length mismatch");
  std::vector<double> xz(x.begin(), x.end()), t(n, 0.0);
  for (auto d : bc_.dofs) xz[d] = 0.0;
  op_.add_mult(xz, t);
  for (std::size_t i = 0; i < n; ++i) y[i] += fixed_[i] ? x[i] : t[i];
}

std::vector<double> ConstrainedOperator::constrain_diagonal(std::vector<double> diag) const {
  for (auto d : bc_.dofs) diag[d] = 1.0;
  return diag;
}

ConstrainedOperator with_essential_bc(const LinearOperator& op, BcConstraint bc) {
  return ConstrainedOperator(op, std::move(bc));
}

} // namespace elast
