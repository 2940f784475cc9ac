#pragma once

#include "elast/gmg.hpp"
#include "elast/material.hpp"
#include "elast/operators.hpp"
#include "elast/space.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace elast {

enum class Subcommand { Solve, Bench, Converge, Verify };
enum class PrecondKind { Gmg, Jacobi, None };

std::string precond_name(PrecondKind k);

struct RunConfig {
  Subcommand subcommand = Subcommand::Solve;
  int order = 2;
  std::vector<int> orders;  ///< bench / converge / verify sweep; defaults to {order}
  std::array<int, 3> cells = {2, 2, 2};
  int refine = 2;           ///< fine mesh = base refined this many times; levels = refine + 1
  Variant variant = Variant::PAop;
  std::vector<Variant> variants;  ///< bench sweep; defaults to {variant}
  PrecondKind pc = PrecondKind::Gmg;
  double lambda = 1.0;
  double mu = 1.0;
  std::string material_file;
  std::vector<BoxFace> bc_faces = {BoxFace::XMin};
  std::vector<Component> bc_components = {Component::X, Component::Y, Component::Z};
  double rel_tol = 1e-8;
  int max_iters = 1000;
  int cheby_order = 3;
  int smooth_steps = 1;
  std::string csv_path;
  std::string vtk_path;
  std::uint64_t seed = 12345;
  int threads = 0;  ///< 0: OpenMP default
  std::optional<std::size_t> dof_budget;  ///< bench: choose meshes near this vector ndof
  std::optional<double> mem_cap_mb;       ///< operators whose storage exceeds this are not built
  bool quiet = false;

  bool help = false;
  std::string help_text;

  int levels() const { return refine + 1; }
  VoigtMaterial material() const;
  BcSpec bc() const;
};

/// Throws UsageError for unknown flags, out-of-range values and contradictory options.
RunConfig parse_config(const std::vector<std::string>& args);

struct BenchRecord {
  std::string variant;  ///< variant name; "<name>-oom" when the memory cap was exceeded
  int p = 0;
  int levels = 0;
  std::size_t ndof = 0;
  int iterations = 0;
  double setup_s = 0.0;
  double solve_s = 0.0;
  double apply_s = 0.0;
  double total_s = 0.0;
  std::uint64_t flops = 0;        ///< per operator application
  std::uint64_t bytes_model = 0;  ///< per operator application
  double op_intensity = 0.0;
  double mdof_per_s = 0.0;
  std::uint64_t operator_bytes = 0;

  bool oom() const;
};

struct SolveOutcome {
  BenchRecord record;
  SolveReport report;
  std::vector<double> solution;
  std::unique_ptr<FESpace> space;
};

/// Fine mesh for order p whose vector ndof is closest to `budget`, built as
/// a base mesh of the unit cube refined `refine` times. Returns base cells.
std::array<int, 3> cells_for_budget(int p, int refine, std::size_t budget);

/// Builds, solves the default load case and times the phases for one variant.
SolveOutcome run_solve(const RunConfig& config, Variant variant, int p,
                       const std::array<int, 3>& base_cells);

/// One record per (p, variant). Throws InvariantViolation if variants with the
/// same p and preconditioner disagree on the iteration count.
std::vector<BenchRecord> run_benchmark(const RunConfig& config);

void emit_csv(const std::vector<BenchRecord>& records, const std::string& path);
std::string format_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(const std::string& text);

/// Legacy ASCII structured grid with the displacement at the lattice nodes.
void emit_vtk(const FESpace& space, std::span<const double> solution, const std::string& path);

extern const char* const kCsvHeader;

/// CLI entry point; returns the process exit status.
int run_cli(const std::vector<std::string>& args);

} // namespace elast
