#include <gtest/gtest.h>

#include "elast/bench.hpp"
#include "elast/errors.hpp"

#include <omp.h>

#include <cmath>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace elast;

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("elast_test_" + name);
}

// Columns other than the wall-clock ones.
void expect_same_counts(const BenchRecord& a, const BenchRecord& b) {
  EXPECT_EQ(a.variant, b.variant);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.levels, b.levels);
  EXPECT_EQ(a.ndof, b.ndof);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.flops, b.flops);
  EXPECT_EQ(a.bytes_model, b.bytes_model);
  EXPECT_EQ(a.op_intensity, b.op_intensity);
  EXPECT_EQ(a.operator_bytes, b.operator_bytes);
}

} // namespace

TEST(ParseConfig, Examples) {
  const auto cfg = parse_config(words("solve --order 4 --refine 2 --assembly paop --pc gmg"));
  EXPECT_EQ(cfg.subcommand, Subcommand::Solve);
  EXPECT_EQ(cfg.order, 4);
  EXPECT_EQ(cfg.levels(), 3);
  EXPECT_EQ(cfg.variant, Variant::PAop);
  EXPECT_EQ(cfg.pc, PrecondKind::Gmg);

  EXPECT_THROW(parse_config(words("solve --order 9")), UsageError);
  EXPECT_THROW(parse_config(words("--order 9")), UsageError);

  const auto fa = parse_config(words("solve --assembly fa --pc gmg"));
  EXPECT_EQ(fa.variant, Variant::FA);
  EXPECT_EQ(fa.pc, PrecondKind::Gmg);
}

TEST(ParseConfig, Defaults) {
  const auto cfg = parse_config(words("solve"));
  EXPECT_EQ(cfg.order, 2);
  EXPECT_EQ(cfg.rel_tol, 1e-8);
  EXPECT_EQ(cfg.bc_faces, std::vector<BoxFace>{BoxFace::XMin});
  EXPECT_EQ(cfg.bc_components.size(), 3u);
  EXPECT_EQ(cfg.lambda, 1.0);
  EXPECT_EQ(cfg.mu, 1.0);
  EXPECT_EQ(cfg.cheby_order, 3);
}

TEST(ParseConfig, Lists) {
  const auto cfg = parse_config(
      words("bench --orders 1,2,8 --assemblies fa,pa-sumfac --cells 3,2,1 --bc-faces xmin,zmax "
            "--bc-components xz --pc jacobi --threads 2"));
  EXPECT_EQ(cfg.orders, (std::vector<int>{1, 2, 8}));
  EXPECT_EQ(cfg.variants, (std::vector<Variant>{Variant::FA, Variant::PASumFac}));
  EXPECT_EQ(cfg.cells, (std::array<int, 3>{3, 2, 1}));
  EXPECT_EQ(cfg.bc_faces, (std::vector<BoxFace>{BoxFace::XMin, BoxFace::ZMax}));
  EXPECT_EQ(cfg.bc_components, (std::vector<Component>{Component::X, Component::Z}));
  EXPECT_EQ(cfg.threads, 2);
}

TEST(ParseConfig, UsageErrors) {
  for (const char* bad : {"solve --bogus", "", "solve bench", "solve --assembly xx", "solve --pc ilu",
                          "solve --cells 2,2", "solve --cells 0", "solve --refine 0",
                          "bench --vtk out.vtk", "solve --mu -1", "solve --orders 1,2",
                          "solve --bc-components w", "bench --dofs 1000 --cells 2",
                          "converge --refine 0", "solve --tol 0", "solve --dofs 1000"}) {
    EXPECT_THROW(parse_config(words(bad)), UsageError) << bad;
  }
  EXPECT_NO_THROW(parse_config(words("solve --refine 0 --pc jacobi")));
}

TEST(ParseConfig, Help) {
  const auto cfg = parse_config(words("--help"));
  EXPECT_TRUE(cfg.help);
  EXPECT_NE(cfg.help_text.find("--assembly"), std::string::npos);
}

TEST(Cli, ExitStatus) {
  EXPECT_EQ(run_cli(words("solve --order 9")), 2);
  EXPECT_EQ(run_cli(words("solve --order 1 --refine 1 --quiet")), 0);
  EXPECT_EQ(run_cli(words("solve --order 2 --refine 1 --max-iters 1 --quiet")), 1);
  EXPECT_EQ(run_cli(words("solve --order 1 --refine 1 --quiet --csv /nonexistent/dir/x.csv")), 1);
}

TEST(Csv, EmptyAndSingle) {
  EXPECT_EQ(format_csv({}), std::string(kCsvHeader) + "\n");
  BenchRecord r;
  r.variant = "paop";
  const auto text = format_csv({r});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(std::string(kCsvHeader),
            "variant,p,levels,ndof,iters,setup_s,solve_s,apply_s,total_s,flops,bytes_model,"
            "op_intensity,mdof_per_s,operator_bytes");
}

TEST(Csv, RoundTripExact) {
  BenchRecord r;
  r.variant = "pa-voigt";
  r.p = 7;
  r.levels = 3;
  r.ndof = 123456789;
  r.iterations = 11;
  r.setup_s = 0.1;
  r.solve_s = 1.0 / 3.0;
  r.apply_s = 1e-300;
  r.total_s = 12345.678901234567;
  r.flops = 18446744073709551615ull;
  r.bytes_model = 42;
  r.op_intensity = 2.0 / 7.0;
  r.mdof_per_s = 6.02e23;
  r.operator_bytes = 1ull << 40;
  const auto back = parse_csv(format_csv({r, r}));
  ASSERT_EQ(back.size(), 2u);
  expect_same_counts(back[1], r);
  EXPECT_EQ(back[1].setup_s, r.setup_s);
  EXPECT_EQ(back[1].solve_s, r.solve_s);
  EXPECT_EQ(back[1].apply_s, r.apply_s);
  EXPECT_EQ(back[1].total_s, r.total_s);
  EXPECT_EQ(back[1].mdof_per_s, r.mdof_per_s);
  const auto text = format_csv({r});
  EXPECT_EQ(text.find(' '), std::string::npos);
}

TEST(Csv, FileAndUnwritablePath) {
  const auto path = temp_path("records.csv");
  BenchRecord r;
  r.variant = "fa";
  emit_csv({r}, path.string());
  EXPECT_EQ(read_file(path), format_csv({r}));
  std::filesystem::remove(path);
  EXPECT_THROW(emit_csv({r}, "/nonexistent/dir/x.csv"), IoError);
}

TEST(Vtk, LinearFieldAndZero) {
  const auto space = build_space(build_cartesian_mesh({2, 1, 1}, {2, 1, 1}), 2);
  const std::size_t ns = space.scalar_ndof();
  std::vector<double> u(space.vector_ndof(), 0.0);
  for (std::size_t i = 0; i < ns; ++i) u[i] = space.node_coordinates(i)[0];
  const auto path = temp_path("field.vtk");
  emit_vtk(space, u, path.string());
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# vtk DataFile Version 3.0");
  std::string word;
  while (in >> word && word != "DIMENSIONS") {}
  int nx, ny, nz;
  in >> nx >> ny >> nz;
  EXPECT_EQ(std::size_t(nx) * ny * nz, ns);
  while (in >> word && word != "POINTS") {}
  std::size_t npts;
  in >> npts >> word;
  EXPECT_EQ(npts, ns);
  std::vector<std::array<double, 3>> pts(npts);
  for (auto& p : pts) in >> p[0] >> p[1] >> p[2];
  while (in >> word && word != "VECTORS") {}
  in >> word >> word;
  for (std::size_t i = 0; i < ns; ++i) {
    double a, b, c;
    in >> a >> b >> c;
    EXPECT_EQ(a, pts[i][0]);
    EXPECT_EQ(b, 0.0);
    EXPECT_EQ(c, 0.0);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(emit_vtk(space, u, "/nonexistent/dir/x.vtk"), IoError);
}

TEST(Budget, MeshNearTarget) {
  for (int p : {1, 2, 4, 8}) {
    const auto cells = cells_for_budget(p, 1, 100000);
    std::size_t n = 3;
    for (int c : cells) n *= std::size_t(p * 2 * c + 1);
    EXPECT_NEAR(double(n), 100000.0, 20000.0) << "p=" << p;
  }
}

TEST(Benchmark, SameIterationsAcrossVariants) {
  auto cfg = parse_config(words("bench --orders 2 --assemblies fa,pa,paop --refine 1"));
  const auto recs = run_benchmark(cfg);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.iterations, recs[0].iterations);
    EXPECT_GE(r.total_s, r.setup_s + r.solve_s);
    EXPECT_GE(r.solve_s, r.apply_s);
    EXPECT_GT(r.flops, 0u);
  }
}

TEST(Benchmark, VariantsAgreeOnSolution) {
  const auto cfg = parse_config(words("solve --order 3 --refine 1"));
  const auto ref = run_solve(cfg, Variant::FA, 3, cfg.cells);
  for (Variant v : {Variant::PA, Variant::PASumFac, Variant::PAVoigt, Variant::PAop}) {
    const auto out = run_solve(cfg, v, 3, cfg.cells);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ref.solution.size(); ++i) {
      num += std::pow(out.solution[i] - ref.solution[i], 2);
      den += std::pow(ref.solution[i], 2);
    }
    EXPECT_LE(std::sqrt(num / den), 10 * cfg.rel_tol) << variant_name(v);
  }
}

TEST(Benchmark, MemoryCapProducesOomRecord) {
  auto cfg = parse_config(words("bench --orders 4 --assemblies fa,paop --refine 1 --mem-cap-mb 20"));
  const auto recs = run_benchmark(cfg);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].variant, "fa-oom");
  EXPECT_TRUE(recs[0].oom());
  EXPECT_GT(double(recs[0].operator_bytes), 20.0 * 1024 * 1024);
  EXPECT_EQ(recs[0].iterations, 0);
  EXPECT_EQ(recs[1].variant, "paop");
  EXPECT_GT(recs[1].iterations, 0);
}

TEST(Benchmark, DeterministicAcrossRunsAndThreads) {
  const auto cfg = parse_config(words("bench --orders 1,3 --assemblies pa,paop --refine 1 --seed 7"));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = run_benchmark(cfg);
  const auto b = run_benchmark(cfg);
  omp_set_num_threads(3);
  const auto c = run_benchmark(cfg);
  omp_set_num_threads(saved);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    expect_same_counts(a[i], b[i]);
    expect_same_counts(a[i], c[i]);
  }
}

TEST(Benchmark, SolutionsBitwiseAcrossThreads) {
  const auto cfg = parse_config(words("solve --order 3 --refine 1"));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = run_solve(cfg, Variant::PAop, 3, cfg.cells);
  omp_set_num_threads(4);
  const auto b = run_solve(cfg, Variant::PAop, 3, cfg.cells);
  omp_set_num_threads(saved);
  EXPECT_EQ(a.solution, b.solution);
}
