#include "elast/bench.hpp"

#include "elast/errors.hpp"
#include "elast/verify.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <sys/resource.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace elast {

const char* const kCsvHeader =
    "variant,p,levels,ndof,iters,setup_s,solve_s,apply_s,total_s,flops,bytes_model,"
    "op_intensity,mdof_per_s,operator_bytes";

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::map<std::string, BoxFace> kFaceNames = {
    {"xmin", BoxFace::XMin}, {"xmax", BoxFace::XMax}, {"ymin", BoxFace::YMin},
    {"ymax", BoxFace::YMax}, {"zmin", BoxFace::ZMin}, {"zmax", BoxFace::ZMax}};

const std::map<std::string, PrecondKind> kPrecondNames = {
    {"gmg", PrecondKind::Gmg}, {"jacobi", PrecondKind::Jacobi}, {"none", PrecondKind::None}};

std::vector<std::string> variant_names() {
  std::vector<std::string> names;
  for (Variant v : {Variant::FA, Variant::PA, Variant::PASumFac, Variant::PAVoigt, Variant::PAop})
    names.emplace_back(variant_name(v));
  return names;
}

// Times only the operator applications issued through it.
class TimedOperator : public LinearOperator {
public:
  explicit TimedOperator(const LinearOperator& op) : op_(op) {}
  std::size_t size() const override { return op_.size(); }
  void add_mult(std::span<const double> x, std::span<double> y) const override {
    const auto t0 = Clock::now();
    op_.add_mult(x, y);
    seconds_ += seconds_since(t0);
  }
  double seconds() const { return seconds_; }

private:
  const LinearOperator& op_;
  mutable double seconds_ = 0.0;
};

std::size_t vector_ndof_of(int p, const std::array<int, 3>& fine_cells) {
  std::size_t n = 3;
  for (int c : fine_cells) n *= std::size_t(p * c + 1);
  return n;
}

template <class T>
void put_number(std::string& out, T value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

template <class T>
T get_number(std::string_view s) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("csv: bad numeric field '" + std::string(s) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

long peak_rss_kb() {
  rusage ru{};
  if (getrusage(RUSAGE_SELF, &ru) != 0) return -1;
  return ru.ru_maxrss;
}

} // namespace

std::string precond_name(PrecondKind k) {
  for (const auto& [name, kind] : kPrecondNames)
    if (kind == k) return name;
  return "?";
}

VoigtMaterial RunConfig::material() const {
  if (!material_file.empty()) return read_anisotropic_config(material_file);
  return make_isotropic(lambda, mu);
}

BcSpec RunConfig::bc() const {
  BcSpec spec;
  spec.faces = bc_faces;
  spec.components = bc_components;
  return spec;
}

bool BenchRecord::oom() const {
  return variant.size() > 4 && variant.compare(variant.size() - 4, 4, "-oom") == 0;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"High-order finite element solver for 3D linear elasticity", "elasticity"};
  app.require_subcommand(1, 1);
  auto* solve = app.add_subcommand("solve", "Solve the benchmark problem once");
  auto* bench = app.add_subcommand("bench", "Sweep orders and operator variants, write CSV");
  auto* converge = app.add_subcommand("converge", "Convergence study on a manufactured solution");
  auto* verify = app.add_subcommand("verify", "Patch tests");
  for (auto* sub : {solve, bench, converge, verify}) sub->fallthrough();

  std::vector<int> cells;
  std::string assembly(variant_name(cfg.variant));
  std::vector<std::string> assemblies;
  std::string pc = "gmg";
  std::vector<std::string> faces = {"xmin"};
  std::string components = "xyz";
  std::size_t dofs = 0;
  double mem_cap = 0.0;

  app.add_option("--order,-p", cfg.order, "Polynomial order")->check(CLI::Range(1, 8));
  app.add_option("--orders", cfg.orders, "Orders to sweep (bench, converge, verify)")
      ->delimiter(',')
      ->check(CLI::Range(1, 8));
  auto* cells_opt = app.add_option("--cells", cells, "Base mesh cells: n or nx,ny,nz")
                        ->delimiter(',')
                        ->expected(1, 3)
                        ->check(CLI::Range(1, 4096));
  app.add_option("--refine", cfg.refine, "Uniform refinements of the base mesh")
      ->check(CLI::Range(0, 10));
  app.add_option("--assembly", assembly, "Operator variant")->check(CLI::IsMember(variant_names()));
  app.add_option("--assemblies", assemblies, "Variants to sweep (bench)")
      ->delimiter(',')
      ->check(CLI::IsMember(variant_names()));
  app.add_option("--pc", pc, "Preconditioner")->check(CLI::IsMember({"gmg", "jacobi", "none"}));
  auto* lambda_opt = app.add_option("--lambda", cfg.lambda, "First Lame parameter");
  auto* mu_opt = app.add_option("--mu", cfg.mu, "Shear modulus");
  app.add_option("--material-file", cfg.material_file, "Anisotropic 6x6 stiffness file")
      ->check(CLI::ExistingFile)
      ->excludes(lambda_opt)
      ->excludes(mu_opt);
  app.add_option("--bc-faces", faces, "Clamped faces (xmin,...,zmax)")
      ->delimiter(',')
      ->check(CLI::IsMember({"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"}));
  app.add_option("--bc-components", components, "Clamped components, subset of xyz");
  app.add_option("--tol", cfg.rel_tol, "Relative residual tolerance")
      ->check(CLI::Range(1e-300, 1.0));
  app.add_option("--max-iters", cfg.max_iters, "CG iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--cheby-order", cfg.cheby_order, "Chebyshev polynomial degree")
      ->check(CLI::Range(1, 50));
  app.add_option("--smooth-steps", cfg.smooth_steps, "Smoother applications per visit")
      ->check(CLI::Range(1, 50));
  app.add_option("--csv", cfg.csv_path, "CSV output path");
  auto* vtk_opt = app.add_option("--vtk", cfg.vtk_path, "VTK output path (solve)");
  app.add_option("--seed", cfg.seed, "Seed for the eigenvalue estimate");
  app.add_option("--threads", cfg.threads, "OpenMP threads (0: default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--dofs", dofs, "Target vector ndof; chooses the base mesh per order")
      ->check(CLI::PositiveNumber)
      ->excludes(cells_opt);
  app.add_option("--mem-cap-mb", mem_cap, "Skip operators whose storage exceeds this")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet,-q", cfg.quiet, "Only print errors");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    cfg.help = true;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (*solve) cfg.subcommand = Subcommand::Solve;
  if (*bench) cfg.subcommand = Subcommand::Bench;
  if (*converge) cfg.subcommand = Subcommand::Converge;
  if (*verify) cfg.subcommand = Subcommand::Verify;

  if (cells.size() == 1) cfg.cells = {cells[0], cells[0], cells[0]};
  else if (cells.size() == 2) throw UsageError("--cells takes one or three values");
  else if (cells.size() == 3) cfg.cells = {cells[0], cells[1], cells[2]};

  cfg.variant = parse_variant(assembly);
  for (const auto& a : assemblies) cfg.variants.push_back(parse_variant(a));
  if (cfg.variants.empty()) cfg.variants = {cfg.variant};
  if (cfg.orders.empty()) cfg.orders = {cfg.order};
  cfg.pc = kPrecondNames.at(pc);

  cfg.bc_faces.clear();
  for (const auto& f : faces) {
    const BoxFace bf = kFaceNames.at(f);
    if (std::find(cfg.bc_faces.begin(), cfg.bc_faces.end(), bf) == cfg.bc_faces.end())
      cfg.bc_faces.push_back(bf);
  }
  cfg.bc_components.clear();
  for (char c : components) {
    if (c < 'x' || c > 'z') throw UsageError("--bc-components: expected letters from 'xyz'");
    const auto comp = Component(c - 'x');
    if (std::find(cfg.bc_components.begin(), cfg.bc_components.end(), comp) ==
        cfg.bc_components.end())
      cfg.bc_components.push_back(comp);
  }
  if (dofs > 0) cfg.dof_budget = dofs;
  if (mem_cap > 0) cfg.mem_cap_mb = mem_cap;

  const bool needs_bc = cfg.subcommand == Subcommand::Solve || cfg.subcommand == Subcommand::Bench;
  if (needs_bc && (cfg.bc_faces.empty() || cfg.bc_components.empty()))
    throw UsageError("no clamped DOFs: the elasticity system would be singular");
  if (needs_bc && cfg.pc == PrecondKind::Gmg && cfg.refine < 1)
    throw UsageError("--pc gmg needs --refine >= 1 (at least two levels)");
  if (cfg.subcommand == Subcommand::Converge && cfg.refine < 1)
    throw UsageError("converge needs --refine >= 1 to report a rate");
  if (cfg.dof_budget && cfg.subcommand != Subcommand::Bench)
    throw UsageError("--dofs is only available with bench");
  if (*vtk_opt && cfg.subcommand != Subcommand::Solve)
    throw UsageError("--vtk is only available with solve");
  if (cfg.subcommand == Subcommand::Solve && (cfg.orders.size() > 1 || cfg.variants.size() > 1))
    throw UsageError("solve runs a single order and variant; use bench to sweep");

  try {
    validate(cfg.material());
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("material: ") + e.what());
  }
  return cfg;
}

std::array<int, 3> cells_for_budget(int p, int refine, std::size_t budget) {
  if (budget == 0) throw InvalidArgument("cells_for_budget: zero budget");
  const int scale = 1 << refine;
  const double per_axis = std::cbrt(double(budget) / 3.0);
  const int guess = std::max(1, int(std::lround((per_axis - 1.0) / (p * scale))));
  std::array<int, 3> best = {guess, guess, guess};
  double best_err = INFINITY;
  const int lo = std::max(1, guess - 2), hi = guess + 2;
  // Near-cubic candidates: base cells differ by at most one along any axis.
  for (int a = lo; a <= hi; ++a)
    for (int b = a; b <= std::min(hi, a + 1); ++b)
      for (int c = b; c <= std::min(hi, a + 1); ++c) {
        const std::size_t n = vector_ndof_of(p, {a * scale, b * scale, c * scale});
        const double err = std::abs(double(n) - double(budget)) / double(budget);
        if (err < best_err) {
          best_err = err;
          best = {c, b, a};
        }
      }
  return best;
}

SolveOutcome run_solve(const RunConfig& config, Variant variant, int p,
                       const std::array<int, 3>& base_cells) {
  const auto t_total = Clock::now();
  SolveOutcome out;
  BenchRecord& rec = out.record;
  rec.variant = std::string(variant_name(variant));
  rec.p = p;
  rec.levels = config.levels();

  const auto base = build_cartesian_mesh({1.0, 1.0, 1.0}, base_cells);
  CartesianMesh fine = base;
  for (int r = 0; r < config.refine; ++r) fine = refine_uniform(fine);
  out.space = std::make_unique<FESpace>(fine, p);
  const FESpace& space = *out.space;
  rec.ndof = space.vector_ndof();
  rec.operator_bytes = operator_storage_bytes(variant, space, p + 1);
  const MaterialField material = MaterialField::constant(config.material());
  const std::uint64_t iso_points =
      material.count_isotropic(space.num_elements(), std::size_t((p + 1) * (p + 1) * (p + 1)));
  const ApplyCost cost = apply_cost(variant, space, p + 1, iso_points);
  rec.flops = cost.flops;
  rec.bytes_model = cost.bytes;
  rec.op_intensity = cost.bytes == 0 ? 0.0 : double(cost.flops) / double(cost.bytes);

  if (config.mem_cap_mb && double(rec.operator_bytes) > *config.mem_cap_mb * 1024.0 * 1024.0) {
    rec.variant += "-oom";
    rec.total_s = seconds_since(t_total);
    return out;
  }

  const auto t_setup = Clock::now();
  const BcSpec bc = config.bc();
  std::unique_ptr<GmgPreconditioner> gmg;
  std::unique_ptr<ElasticOperator> op;
  std::unique_ptr<ConstrainedOperator> constrained;
  std::unique_ptr<JacobiPreconditioner> jacobi;
  const LinearOperator* system = nullptr;
  const LinearOperator* precond = nullptr;
  BcConstraint fixed;
  if (config.pc == PrecondKind::Gmg) {
    GmgOptions opts;
    opts.chebyshev_order = config.cheby_order;
    opts.smoothing_steps = config.smooth_steps;
    opts.seed = config.seed;
    opts.fine_variant = variant;
    gmg = build_gmg(base, config.levels(), p, material, bc, opts);
    system = &gmg->fine_operator();
    precond = gmg.get();
    fixed = gmg->fine_operator().constraint();
  } else {
    op = make_operator(variant, space, material);
    fixed = bc.on(space);
    constrained = std::make_unique<ConstrainedOperator>(*op, fixed);
    system = constrained.get();
    if (config.pc == PrecondKind::Jacobi) {
      jacobi = std::make_unique<JacobiPreconditioner>(
          constrained->constrain_diagonal(op->assemble_diagonal()));
      precond = jacobi.get();
    }
  }
  auto rhs = assemble_load(space, [](const Vec3&) { return Vec3{0.0, 0.0, -1.0}; },
                           gauss_legendre_rule(p + 1));
  for (auto d : fixed.dofs) rhs[d] = 0.0;
  rec.setup_s = seconds_since(t_setup);

  const TimedOperator timed(*system);
  out.solution.assign(space.vector_ndof(), 0.0);
  const auto t_solve = Clock::now();
  out.report = cg_solve(timed, precond, rhs, out.solution, config.rel_tol, config.max_iters);
  rec.solve_s = seconds_since(t_solve);
  rec.apply_s = timed.seconds();
  rec.iterations = out.report.iterations;
  rec.mdof_per_s =
      rec.solve_s > 0 ? double(rec.ndof) * rec.iterations / rec.solve_s / 1e6 : 0.0;
  rec.total_s = seconds_since(t_total);
  return out;
}

std::vector<BenchRecord> run_benchmark(const RunConfig& config) {
  std::vector<BenchRecord> records;
  for (int p : config.orders) {
    const auto cells =
        config.dof_budget ? cells_for_budget(p, config.refine, *config.dof_budget) : config.cells;
    std::optional<int> iters;
    std::string first;
    for (Variant v : config.variants) {
      auto outcome = run_solve(config, v, p, cells);
      const BenchRecord& rec = outcome.record;
      if (!rec.oom()) {
        if (iters && *iters != rec.iterations)
          throw InvariantViolation("p=" + std::to_string(p) + ": " + rec.variant + " took " +
                                   std::to_string(rec.iterations) + " iterations, " + first +
                                   " took " + std::to_string(*iters));
        iters = rec.iterations;
        first = rec.variant;
      }
      records.push_back(rec);
    }
  }
  return records;
}

std::string format_csv(const std::vector<BenchRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.variant;
    const auto field = [&](auto v) {
      out += ',';
      put_number(out, v);
    };
    field(r.p);
    field(r.levels);
    field(r.ndof);
    field(r.iterations);
    field(r.setup_s);
    field(r.solve_s);
    field(r.apply_s);
    field(r.total_s);
    field(r.flops);
    field(r.bytes_model);
    field(r.op_intensity);
    field(r.mdof_per_s);
    field(r.operator_bytes);
    out += '\n';
  }
  return out;
}

std::vector<BenchRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("csv: missing or wrong header");
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw IoError("csv: expected 14 fields, got " + std::to_string(f.size()));
    BenchRecord r;
    r.variant = std::string(f[0]);
    r.p = get_number<int>(f[1]);
    r.levels = get_number<int>(f[2]);
    r.ndof = get_number<std::size_t>(f[3]);
    r.iterations = get_number<int>(f[4]);
    r.setup_s = get_number<double>(f[5]);
    r.solve_s = get_number<double>(f[6]);
    r.apply_s = get_number<double>(f[7]);
    r.total_s = get_number<double>(f[8]);
    r.flops = get_number<std::uint64_t>(f[9]);
    r.bytes_model = get_number<std::uint64_t>(f[10]);
    r.op_intensity = get_number<double>(f[11]);
    r.mdof_per_s = get_number<double>(f[12]);
    r.operator_bytes = get_number<std::uint64_t>(f[13]);
    records.push_back(std::move(r));
  }
  return records;
}

void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << format_csv(records);
  if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

void emit_vtk(const FESpace& space, std::span<const double> solution, const std::string& path) {
  const std::size_t ns = space.scalar_ndof();
  if (solution.size() != space.vector_ndof())
    throw InvalidArgument("emit_vtk: solution size does not match the space");
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  const auto dims = space.lattice_dims();
  f << "# vtk DataFile Version 3.0\n"
    << "elasticity displacement, order " << space.order() << "\n"
    << "ASCII\n"
    << "DATASET STRUCTURED_GRID\n"
    << "DIMENSIONS " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << "\n"
    << "POINTS " << ns << " double\n"
    << std::setprecision(17);
  for (std::size_t i = 0; i < ns; ++i) {
    const auto x = space.node_coordinates(i);
    f << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  }
  f << "POINT_DATA " << ns << "\n"
    << "VECTORS displacement double\n";
  for (std::size_t i = 0; i < ns; ++i)
    f << solution[i] << ' ' << solution[ns + i] << ' ' << solution[2 * ns + i] << '\n';
  if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

namespace {

void print_record(const BenchRecord& r, const SolveReport* rep) {
  std::cout << std::left << std::setw(10) << r.variant << " p=" << r.p << " levels=" << r.levels
            << " ndof=" << r.ndof;
  if (r.oom()) {
    std::cout << "  out of memory: operator needs " << r.operator_bytes << " bytes\n";
    return;
  }
  std::cout << " iters=" << r.iterations;
  if (rep) std::cout << " rel_res=" << std::scientific << std::setprecision(2)
                     << rep->final_relative_residual << std::defaultfloat;
  std::cout << std::fixed << std::setprecision(3) << " setup=" << r.setup_s << "s solve="
            << r.solve_s << "s apply=" << r.apply_s << "s  " << std::setprecision(2)
            << r.mdof_per_s << " MDof/s  OI=" << r.op_intensity << std::defaultfloat
            << "  op_bytes=" << r.operator_bytes << '\n';
}

int cmd_solve(const RunConfig& cfg) {
  const auto out = run_solve(cfg, cfg.variant, cfg.order, cfg.cells);
  if (!cfg.quiet) {
    print_record(out.record, &out.report);
    std::cout << "peak_rss_kb=" << peak_rss_kb() << '\n';
  }
  if (!cfg.csv_path.empty()) emit_csv({out.record}, cfg.csv_path);
  if (out.record.oom()) return 1;
  if (!cfg.vtk_path.empty()) emit_vtk(*out.space, out.solution, cfg.vtk_path);
  if (!out.report.converged) {
    std::cerr << "error: CG did not converge in " << cfg.max_iters << " iterations\n";
    return 1;
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const auto records = run_benchmark(cfg);
  if (!cfg.quiet)
    for (const auto& r : records) print_record(r, nullptr);
  if (!cfg.csv_path.empty()) emit_csv(records, cfg.csv_path);
  else if (cfg.quiet) std::cout << format_csv(records);
  return 0;
}

int cmd_converge(const RunConfig& cfg) {
  ConvergenceOptions opts;
  opts.base_cells = cfg.cells[0];
  opts.rel_tol = std::min(cfg.rel_tol, 1e-12);
  opts.max_iters = cfg.max_iters;
  opts.variant = cfg.variant;
  for (int p : cfg.orders) {
    const auto rows = convergence_study(smooth_sine_case(cfg.material()), p, cfg.levels(), opts);
    std::cout << "p=" << p << '\n' << format_convergence_table(rows);
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  bool ok = true;
  for (int p : cfg.orders) {
    const auto space = build_space(build_cartesian_mesh({1, 1, 1}, cfg.cells), p);
    PolynomialField u;
    u.terms[0] = {{1.0, {p, 0, 0}}, {0.5, {0, p, 0}}};
    u.terms[1] = {{-1.0, {0, 0, p}}, {0.3, {1, 1, 0}}};
    u.terms[2] = {{0.7, {p, p, 0}}};
    const auto r = patch_test(space, cfg.material(), u, cfg.variant);
    std::cout << "patch p=" << p << ' ' << (r.passed ? "PASS" : "FAIL") << " error=" << r.error
              << " scale=" << r.scale << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for the option list.\n";
    return 2;
  }
  if (cfg.help) {
    std::cout << cfg.help_text;
    return 0;
  }
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  try {
    switch (cfg.subcommand) {
      case Subcommand::Solve: return cmd_solve(cfg);
      case Subcommand::Bench: return cmd_bench(cfg);
      case Subcommand::Converge: return cmd_converge(cfg);
      case Subcommand::Verify: return cmd_verify(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

} // namespace elast
