#include <drekit/bench.hpp>
#include <drekit/linalg.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <string>

using namespace drekit;

namespace {

bool throws_code(errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const solver_error& e) {
    return e.code() == expected;
  }
  return false;
}

DreProblem benchmark2x2() {
  Mat a(2, 2), c(2, 2), sigma(2, 2);
  a << -2.0, 1.6, -1.6, -0.4;
  c << 1.5, 0.2, 0.2, -0.4;
  sigma << 0.216, -0.008, -0.008, 0.216;
  return DreProblem::constant(a, c, sigma);
}

}  // namespace

TEST_CASE("normal sampler is reproducible and roughly standard") {
  NormalSampler a(42), b(42), c(43);
  double sum = 0.0, sumsq = 0.0;
  bool all_equal = true;
  bool any_differs = false;
  for (int i = 0; i < 10000; ++i) {
    const double x = a();
    if (x != b()) all_equal = false;
    if (x != c()) any_differs = true;
    sum += x;
    sumsq += x * x;
  }
  REQUIRE(all_equal);
  REQUIRE(any_differs);
  const double mean = sum / 10000.0;
  const double var = sumsq / 10000.0 - mean * mean;
  REQUIRE(std::abs(mean) < 0.05);
  REQUIRE(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("random orthogonal matrices are orthogonal and reproducible") {
  const Mat q = random_orthogonal(5, 7);
  REQUIRE((q.transpose() * q - Mat::Identity(5, 5)).norm() < 1e-13);
  REQUIRE((q - random_orthogonal(5, 7)).norm() == 0.0);
  REQUIRE((q - random_orthogonal(5, 8)).norm() > 1e-3);
}

TEST_CASE("stiff family initial value has eigenvalues 1..n") {
  const StiffFamily f = make_stiff_family(4, 3.0, 11);
  const auto e = sym_eig(f.value(0.0));
  for (Eigen::Index i = 0; i < 4; ++i)
    REQUIRE(e.values(i) == Catch::Approx(static_cast<double>(i + 1)));
}

TEST_CASE("stiff family relaxes to k at long times") {
  const StiffFamily f = make_stiff_family(3, 5.0, 2);
  REQUIRE((f.value(10.0) - 5.0 * Mat::Identity(3, 3)).norm() < 1e-12);
  REQUIRE(f.stability_step() == Catch::Approx(0.4));
}

TEST_CASE("stiff family closed form solves its own library-form problem") {
  // propagate the forward value at t = 0.3 to t = 0.8 on the backward clock
  const StiffFamily f = make_stiff_family(3, 2.0, 5);
  const DreProblem prob = f.problem();
  const Mat p = truth_solve(prob, f.value(0.3), -0.8, -0.3);
  REQUIRE(rel_error(p, f.value(0.8)) < 1e-10);
}

TEST_CASE("adaptive reference integrator follows the tangent tightly") {
  const DreProblem prob = DreProblem::constant(
      Mat::Zero(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1));
  const Mat p = truth_solve(prob, Mat::Zero(1, 1), -1.2, 0.0);
  REQUIRE(std::abs(p(0, 0) - std::tan(1.2)) < 1e-11 * (1.0 + std::tan(1.2)));
}

TEST_CASE("adaptive reference integrator stops at finite-time escapes") {
  const DreProblem prob = DreProblem::constant(
      Mat::Zero(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1));
  REQUIRE(throws_code(errc::stiffness_limit, [&] {
    (void)truth_solve(prob, Mat::Zero(1, 1), -2.0, 0.0);
  }));
}

TEST_CASE("shortest round-trip formatting") {
  REQUIRE(fmt_double(0.1) == "0.1");
  REQUIRE(fmt_double(0.2) == "0.2");
  REQUIRE(fmt_double(1000.0) == "1000");
  REQUIRE(fmt_double(0.0) == "0");
  REQUIRE(fmt_double(-2.5) == "-2.5");
  for (double v : {3.141592653589793, 1.0 / 3.0, 1e-300, 6.02e23}) {
    REQUIRE(std::stod(fmt_double(v)) == v);
  }
}

TEST_CASE("benchmark CSV schema is stable") {
  REQUIRE(std::string(bench_csv_header()) ==
          "method,n,k,t1,t2,M,N,Nrk,h,stability_h,err,flops_model,runtime_ns,"
          "warnings");

  BenchRecord r;
  r.method = "a";
  r.n = 2;
  r.t1 = 0.0;
  r.t2 = 10.0;
  r.levels = 1;
  r.steps = 1;
  r.seed_rk = 0;
  r.h = 10.0;
  r.runtime_ns = 123;
  REQUIRE(bench_csv_row(r) == "a,2,,0,10,1,1,0,10,,,,123,");

  r.k = 5.0;
  r.stability_h = 0.4;
  r.err = 0.5;
  r.flops = Rational(300);
  r.warnings = {"one, with commas", "two"};
  REQUIRE(bench_csv_row(r) ==
          "a,2,5,0,10,1,1,0,10,0.4,0.5,300,123,one with commas;two");
}

TEST_CASE("non-finite errors print as empty cells") {
  BenchRecord r;
  r.method = "c";
  r.n = 1;
  r.err = std::numeric_limits<double>::quiet_NaN();
  const std::string row = bench_csv_row(r);
  REQUIRE(row.find("nan") == std::string::npos);
}

TEST_CASE("stiff benchmark run reports the schedule and a small error") {
  const StiffFamily f = make_stiff_family(2, 2.0, 1);
  const BenchRecord rec =
      run_stiff_bench(f, doubling_method::a, 0.0, 4.0, DoublingSchedule{2, 2, 5});
  REQUIRE(rec.method == "a");
  REQUIRE(rec.n == 2);
  REQUIRE(rec.k.has_value());
  REQUIRE(*rec.k == 2.0);
  REQUIRE(rec.h == Catch::Approx(2.0));
  REQUIRE(rec.stability_h.has_value());
  REQUIRE(*rec.stability_h == Catch::Approx(1.0));
  REQUIRE(rec.err.has_value());
  REQUIRE(*rec.err < 1e-3);
  REQUIRE(rec.flops.has_value());
  REQUIRE(*rec.flops == flop_model(doubling_method::a, 2, 5, 2, 2));
  REQUIRE(rec.runtime_ns > 0);

  // the run is deterministic apart from the clock
  const BenchRecord again =
      run_stiff_bench(f, doubling_method::a, 0.0, 4.0, DoublingSchedule{2, 2, 5});
  REQUIRE(*again.err == *rec.err);
  REQUIRE(again.warnings == rec.warnings);
}

TEST_CASE("doubling sweep emits one record per method per level") {
  const DreProblem prob = benchmark2x2();
  const Mat terminal = (Mat(2, 2) << -0.1, 0.0, 0.0, -0.1).finished();
  const Mat reference = truth_solve(prob, terminal, -4.0, 0.0);
  SweepConfig cfg;
  cfg.horizon = 4.0;
  cfg.m_min = 3;
  cfg.m_max = 5;
  const auto records =
      run_doubling_sweep(prob, terminal, DualityKernel::identity_seed(2), cfg,
                         reference);
  REQUIRE(records.size() == 9);
  for (size_t i = 0; i < records.size(); ++i) {
    const char* expected_method = (i % 3 == 0) ? "a" : (i % 3 == 1) ? "b" : "c";
    REQUIRE(records[i].method == expected_method);
    REQUIRE(records[i].levels == 3 + static_cast<int>(i / 3));
    REQUIRE(records[i].err.has_value());
    REQUIRE(*records[i].err < 1e-2);
    REQUIRE(records[i].h == Catch::Approx(4.0));
  }
}

TEST_CASE("tangent showcase stays accurate away from the poles") {
  warning_list w;
  const auto samples = tan_demo(3.0, 60, 0.05, &w);
  REQUIRE(samples.size() == 61);
  int flagged = 0;
  bool past_pole_checked = false;
  for (const auto& s : samples) {
    if (s.near_pole) {
      ++flagged;
      continue;
    }
    REQUIRE(s.rel_err < 1e-6);
    if (s.t > 1.5707963267948966) past_pole_checked = true;
  }
  REQUIRE(flagged == 2);  // t = 1.55 and t = 1.6 sit within 0.05 of pi/2
  REQUIRE(past_pole_checked);
}

TEST_CASE("tangent showcase CSV row for the initial sample") {
  const auto samples = tan_demo(1.0, 10);
  REQUIRE(std::string(tan_csv_header()) == "t,p,exact,rel_err,near_pole");
  REQUIRE(tan_csv_row(samples.front()) == "0,0,0,0,0");
}
