// Command-line driver: benchmark runners (CSV), a pole-crossing demo, and a
// one-shot solver over JSON problem files.

#include <drekit/drekit.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace drekit;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

doubling_method parse_method_abc(const std::string& s) {
  if (s == "a") return doubling_method::a;
  if (s == "b") return doubling_method::b;
  if (s == "c") return doubling_method::c;
  fail(errc::invalid_argument, "unknown doubling method: " + s);
}

struct StiffArgs {
  int n = 10;
  double k = 5.0;
  double t1 = 0.0;
  double t2 = 10.0;
  int levels = 1;
  int steps = 10;
  int seed_rk = 10;
  std::string method = "a";
  std::uint64_t seed = 1;
  std::string out;
};

void run_stiff(const StiffArgs& a) {
  require(a.t2 > a.t1, errc::invalid_argument, "need t2 > t1");
  const StiffFamily family = make_stiff_family(a.n, a.k, a.seed);
  const BenchRecord rec =
      run_stiff_bench(family, parse_method_abc(a.method), a.t1, a.t2,
                      DoublingSchedule{a.levels, a.steps, a.seed_rk});
  std::ostringstream os;
  os << bench_csv_header() << '\n' << bench_csv_row(rec) << '\n';
  emit(a.out, os.str());
}

struct SweepArgs {
  std::string problem;
  std::string p0_file;
  double horizon = 4.0;
  int m_min = 3;
  int m_max = 17;
  int steps = 1;
  int seed_rk = 1;
  std::string out;
};

void run_sweep(const SweepArgs& a) {
  const ProblemConfig cfg = load_problem(a.problem);
  Mat p0;
  if (!a.p0_file.empty())
    p0 = load_matrix(a.p0_file);
  else if (cfg.p0)
    p0 = *cfg.p0;
  else
    fail(errc::invalid_argument,
         "terminal value required: add \"p0\" to the problem file or pass "
         "--p0");
  require(sym_defect(p0) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");
  const DualityKernel seed =
      cfg.phi0 ? *cfg.phi0 : DualityKernel::identity_seed(cfg.problem.n());

  SweepConfig sc;
  sc.horizon = a.horizon;
  sc.t2 = a.horizon;  // sweep runs over [0, T]
  sc.m_min = a.m_min;
  sc.m_max = a.m_max;
  sc.steps = a.steps;
  sc.seed_rk = a.seed_rk;

  const Mat reference =
      truth_solve(cfg.problem, symmetrized(p0), 0.0, a.horizon);
  const auto records =
      run_doubling_sweep(cfg.problem, symmetrized(p0), seed, sc, reference);

  std::ostringstream os;
  os << bench_csv_header() << '\n';
  for (const auto& r : records) os << bench_csv_row(r) << '\n';
  emit(a.out, os.str());
}

struct TanArgs {
  double horizon = 3.0;
  int steps = 60;
  double margin = 0.05;
  std::string out;
};

void run_tan(const TanArgs& a) {
  warning_list w;
  const auto samples = tan_demo(a.horizon, a.steps, a.margin, &w);
  std::ostringstream os;
  os << tan_csv_header() << '\n';
  for (const auto& s : samples) os << tan_csv_row(s) << '\n';
  emit(a.out, os.str());
}

struct SolveArgs {
  std::string problem;
  std::string p0_file;
  double t1 = 0.0;
  double t2 = 1.0;
  std::string method = "a";
  int levels = 10;
  int steps = 1;
  int seed_rk = 1;
  int rk_steps = 0;
  std::string out;
};

void run_solve(const SolveArgs& a) {
  const ProblemConfig cfg = load_problem(a.problem);
  Mat p0;
  if (!a.p0_file.empty())
    p0 = load_matrix(a.p0_file);
  else if (cfg.p0)
    p0 = *cfg.p0;
  else
    fail(errc::invalid_argument,
         "terminal value required: add \"p0\" to the problem file or pass "
         "--p0");
  require(sym_defect(p0) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");
  p0 = symmetrized(p0);
  require(a.t2 > a.t1, errc::invalid_argument, "need t2 > t1");

  const DualityKernel seed =
      cfg.phi0 ? *cfg.phi0 : DualityKernel::identity_seed(cfg.problem.n());
  warning_list w;
  Mat p;
  if (a.method == "rk") {
    const int steps = a.rk_steps > 0 ? a.rk_steps : 1000;
    p = rk4_dre(cfg.problem, p0, a.t1, a.t2, steps);
  } else if (a.method == "dm") {
    const CondReport r =
        davison_maki(cfg.problem, p0, a.t1, a.t2, a.rk_steps, &w);
    p = r.value;
  } else if (a.method == "leipnik") {
    p = leipnik_solve(cfg.problem, p0, a.t1, a.t2, &w);
  } else if (a.method == "rusnak") {
    p = rusnak_solve(cfg.problem, p0, a.t1, a.t2, std::nullopt, &w);
  } else {
    p = doubling_solve(parse_method_abc(a.method), cfg.problem, p0, a.t1,
                       a.t2, DoublingSchedule{a.levels, a.steps, a.seed_rk},
                       seed, gate_policy::algebraic, &w);
  }
  emit(a.out, solution_json(a.method, a.t1, a.t2, p, w).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Terminal-value matrix Riccati solvers: kernel doubling, closed forms, "
      "and benchmarks"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "benchmark drivers (CSV output)");
  bench->require_subcommand(1);

  StiffArgs st;
  auto* stiff = bench->add_subcommand(
      "stiff", "stiff family with closed-form reference");
  stiff->add_option("--n", st.n, "state dimension")->check(CLI::PositiveNumber);
  stiff->add_option("--k", st.k, "stiffness parameter (> 0)");
  stiff->add_option("--t1", st.t1, "start of the forward-time window");
  stiff->add_option("--t2", st.t2, "end of the forward-time window");
  stiff->add_option("--M", st.levels, "doubling levels")
      ->check(CLI::NonNegativeNumber);
  stiff->add_option("--N", st.steps, "propagation steps")
      ->check(CLI::PositiveNumber);
  stiff->add_option("--nrk", st.seed_rk,
                    "RK4 substeps for the seed (0 = closed-form seed)")
      ->check(CLI::NonNegativeNumber);
  stiff->add_option("--method", st.method, "a | b | c")
      ->check(CLI::IsMember({"a", "b", "c"}));
  stiff->add_option("--seed", st.seed, "RNG seed for the eigenbasis");
  stiff->add_option("--out", st.out, "output CSV path (default: stdout)");
  stiff->callback([&st] { run_stiff(st); });

  SweepArgs sw;
  auto* sweep = bench->add_subcommand(
      "doubling", "doubling-level sweep on a problem file");
  sweep->add_option("--problem", sw.problem, "problem JSON file")->required();
  sweep->add_option("--p0", sw.p0_file,
                    "terminal value file (overrides \"p0\" in the problem)");
  sweep->add_option("--T", sw.horizon, "horizon length")->check(CLI::PositiveNumber);
  sweep->add_option("--m-min", sw.m_min, "smallest doubling level")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--m-max", sw.m_max, "largest doubling level")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--N", sw.steps, "propagation steps")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--nrk", sw.seed_rk, "RK4 substeps for the seed")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", sw.out, "output CSV path (default: stdout)");
  sweep->callback([&sw] { run_sweep(sw); });

  auto* demo = app.add_subcommand("demo", "showcase runs");
  demo->require_subcommand(1);

  TanArgs ta;
  auto* tan = demo->add_subcommand(
      "tan", "scalar flow tan(t): kernel steps across the poles");
  tan->add_option("--T", ta.horizon, "horizon")->check(CLI::PositiveNumber);
  tan->add_option("--steps", ta.steps, "number of samples")
      ->check(CLI::PositiveNumber);
  tan->add_option("--margin", ta.margin,
                  "distance below which a sample counts as near a pole");
  tan->add_option("--out", ta.out, "output CSV path (default: stdout)");
  tan->callback([&ta] { run_tan(ta); });

  SolveArgs so;
  auto* solve = app.add_subcommand("solve", "solve one problem over [t1, t2]");
  solve->add_option("--problem", so.problem, "problem JSON file")->required();
  solve->add_option("--p0", so.p0_file,
                    "terminal value file (overrides \"p0\" in the problem)");
  solve->add_option("--t1", so.t1, "left end of the interval");
  solve->add_option("--t2", so.t2, "right end (terminal data lives here)");
  solve->add_option("--method", so.method,
                    "rk | dm | a | b | c | leipnik | rusnak")
      ->check(CLI::IsMember({"rk", "dm", "a", "b", "c", "leipnik", "rusnak"}));
  solve->add_option("--M", so.levels, "doubling levels (a/b/c)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--N", so.steps, "propagation steps (a/b/c)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--nrk", so.seed_rk, "seed RK4 substeps (a/b/c)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--steps", so.rk_steps,
                    "integration steps for rk/dm (0 = default)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--out", so.out, "output JSON path (default: stdout)");
  solve->callback([&so] { run_solve(so); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const drekit::solver_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return drekit::is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
