#pragma once

// Benchmark harness: a stiff problem family with a closed-form solution, an
// adaptive reference integrator, and CSV emission for the two benchmark
// drivers (stiff single runs and doubling-schedule sweeps).

#include <drekit/analytic.hpp>
#include <drekit/bivariate.hpp>
#include <drekit/doubling.hpp>
#include <drekit/duality.hpp>
#include <drekit/kernel.hpp>
#include <drekit/problem.hpp>
#include <drekit/transition.hpp>
#include <drekit/types.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace drekit {

// Standard normal deviates from a fixed-algorithm Box-Muller transform over
// mt19937_64. std::normal_distribution is implementation-defined, which
// would break bit-reproducibility of benchmark problems across toolchains.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // 53-bit uniforms; u1 shifted into (0, 1] so the log is finite
    const double u1 =
        1.0 - static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the sign
// ambiguity fixed by making diag(R) nonnegative, so a given seed always
// yields the same matrix.
inline Mat random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  NormalSampler g(seed);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

// Stiff family with a closed-form solution: in forward time
//
//     dp/dt = k^2 I - p^2,    p(0) = U diag(1, 2, ..., n) U',
//
// with U orthogonal. Each eigenvalue d of p(0) evolves independently as
//
//     r(t) = (k sinh(kt) + d cosh(kt)) / (cosh(kt) + (d/k) sinh(kt)),
//
// relaxing to k with rate 2k; the transient dies on the scale 1/k while the
// horizon of interest is orders of magnitude longer, which is what makes the
// family stiff. In the library's backward-time convention this is the
// constant-coefficient problem A = 0, C = k^2 I, Sigma = -I (Sigma
// indefinite, hence relax_psd), and p_forward(t) solves it along the
// reversed clock: propagating from terminal value p_forward(t1) at backward
// time -t1 down to -t2 returns p_forward(t2).
struct StiffFamily {
  Eigen::Index n = 1;
  double k = 1.0;
  std::uint64_t seed = 0;
  Mat u;  // orthogonal eigenbasis of the initial value

  DreProblem problem() const {
    return DreProblem::constant(Mat::Zero(n, n),
                                k * k * Mat::Identity(n, n),
                                -Mat::Identity(n, n),
                                /*relax_psd=*/true);
  }

  // Forward-time closed-form value. Written in exp(-2kt) to stay finite for
  // large kt.
  Mat value(double t) const {
    Vec diag(n);
    const double em = std::exp(-2.0 * k * t);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = static_cast<double>(i + 1);
      diag(i) = (k * (1.0 - em) + d * (1.0 + em)) /
                ((1.0 + em) + (d / k) * (1.0 - em));
    }
    return symmetrized(u * diag.asDiagonal() * u.transpose());
  }

  // Explicit-integrator stability bound for this family: the Jacobian
  // eigenvalues reach -2k near equilibrium.
  double stability_step() const { return 2.0 / k; }
};

inline StiffFamily make_stiff_family(Eigen::Index n, double k,
                                     std::uint64_t seed) {
  require(n >= 1, errc::invalid_argument, "stiff family needs n >= 1");
  require(k > 0.0 && std::isfinite(k), errc::invalid_argument,
          "stiff family needs k > 0");
  StiffFamily f;
  f.n = n;
  f.k = k;
  f.seed = seed;
  f.u = random_orthogonal(n, seed);
  return f;
}

// Adaptive Dormand-Prince 5(4) reference integrator for the backward
// terminal-value problem. Tolerances are near the rounding floor by default;
// this is the "truth" other methods are measured against, so it is
// deliberately expensive.
struct TruthOptions {
  double abs_tol = 1e-15;
  double rel_tol = 1e-13;
  long long max_steps = 20'000'000;
};

inline Mat truth_solve(const DreProblem& prob, const Mat& p_terminal,
                       double t1, double t2, const TruthOptions& opt = {},
                       warning_list* warnings = nullptr) {
  detail::require_interval(t1, t2);
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");

  // Dormand-Prince coefficients
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600,
                      e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640,
                      e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  auto f = [&prob](double t, const Mat& y) {
    return dre_derivative(prob.at(t), y);
  };

  Mat y = symmetrized(p_terminal);
  double t = t2;
  double h = -(t2 - t1) / 100.0;  // initial guess, refined by the controller
  Mat k1 = f(t, y);
  long long steps = 0;
  long long rejected_in_a_row = 0;

  while (t > t1) {
    if (++steps > opt.max_steps)
      fail(errc::stiffness_limit,
           "reference integrator exceeded its step budget");
    if (t + h < t1) h = t1 - t;
    if (std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(t)))
      fail(errc::stiffness_limit,
           "reference integrator step size underflowed (finite-time escape "
           "or extreme stiffness)");

    const Mat k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Mat k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Mat k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Mat k5 =
        f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Mat k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                     a64 * k4 + a65 * k5));
    const Mat y5 =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Mat k7 = f(t + h, y5);
    const Mat err_mat =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
      const double r = err_mat(i) / sc;
      sum += r * r;
    }
    const double err = std::sqrt(sum / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += h;
      y = symmetrized(y5);
      k1 = k7;  // first-same-as-last
      rejected_in_a_row = 0;
    } else if (++rejected_in_a_row > 60) {
      fail(errc::stiffness_limit,
           "reference integrator cannot find an acceptable step");
    }
    const double factor = (err == 0.0)
                              ? 5.0
                              : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    h *= factor;
    if (!y.allFinite())
      fail(errc::blowup, "reference integrator: solution escaped");
  }
  (void)warnings;
  return y;
}

// Shortest round-trip decimal representation.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// One benchmark CSV row. Optional fields print as empty cells; the column
// set is shared by both benchmark drivers.
struct BenchRecord {
  std::string method;
  Eigen::Index n = 0;
  std::optional<double> k;
  double t1 = 0.0;
  double t2 = 0.0;
  int levels = 0;
  int steps = 1;
  int seed_rk = 0;
  double h = 0.0;  // span covered by one application of the doubled operator
  std::optional<double> stability_h;
  std::optional<double> err;
  std::optional<Rational> flops;
  std::int64_t runtime_ns = 0;
  std::vector<std::string> warnings;
};

inline const char* bench_csv_header() {
  return "method,n,k,t1,t2,M,N,Nrk,h,stability_h,err,flops_model,runtime_ns,"
         "warnings";
}

inline std::string bench_csv_row(const BenchRecord& r) {
  std::ostringstream os;
  os << r.method << ',' << r.n << ',';
  if (r.k) os << fmt_double(*r.k);
  os << ',' << fmt_double(r.t1) << ',' << fmt_double(r.t2) << ',' << r.levels
     << ',' << r.steps << ',' << r.seed_rk << ',' << fmt_double(r.h) << ',';
  if (r.stability_h) os << fmt_double(*r.stability_h);
  os << ',';
  if (r.err && std::isfinite(*r.err)) os << fmt_double(*r.err);
  os << ',';
  if (r.flops) {
    if (r.flops->is_integer())
      os << r.flops->num();
    else
      os << r.flops->num() << '/' << r.flops->den();
  }
  os << ',' << r.runtime_ns << ',';
  // warnings joined with ';'; commas removed so the CSV stays one cell
  std::string joined;
  for (size_t i = 0; i < r.warnings.size(); ++i) {
    if (i) joined += ';';
    joined += r.warnings[i];
  }
  std::erase(joined, ',');
  os << joined;
  return os.str();
}

// Runs one doubling method on the stiff family and measures error against
// the closed form.
inline BenchRecord run_stiff_bench(const StiffFamily& family,
                                   doubling_method method, double t1,
                                   double t2, const DoublingSchedule& sched) {
  detail::require_interval(t1, t2);
  validate_schedule(sched);
  const DreProblem prob = family.problem();
  const Mat terminal = family.value(t1);
  const Mat reference = family.value(t2);

  BenchRecord rec;
  rec.method = method_name(method);
  rec.n = family.n;
  rec.k = family.k;
  rec.t1 = t1;
  rec.t2 = t2;
  rec.levels = sched.levels;
  rec.steps = sched.steps;
  rec.seed_rk = sched.seed_rk;
  rec.h = (t2 - t1) / static_cast<double>(sched.steps);
  rec.stability_h = family.stability_step();
  rec.flops = flop_model(method, family.n, sched.seed_rk, sched.levels,
                         sched.steps);

  // backward clock: terminal data at -t1, solve down to -t2
  const auto start = std::chrono::steady_clock::now();
  const Mat p = doubling_solve(method, prob, terminal, -t2, -t1, sched,
                               DualityKernel::identity_seed(family.n),
                               gate_policy::algebraic, &rec.warnings);
  const auto stop = std::chrono::steady_clock::now();
  rec.runtime_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
          .count();
  rec.err = rel_error(p, reference);
  return rec;
}

// Sweep configuration for doubling-schedule benchmarks on a fixed problem:
// for each M in [m_min, m_max] all three methods run once against a shared
// reference solution.
struct SweepConfig {
  double horizon = 4.0;  // propagate over [t2 - horizon, t2]
  double t2 = 0.0;
  int m_min = 3;
  int m_max = 17;
  int steps = 1;
  int seed_rk = 1;
};

inline std::vector<BenchRecord> run_doubling_sweep(
    const DreProblem& prob, const Mat& p_terminal, const DualityKernel& seed,
    const SweepConfig& cfg, const Mat& reference) {
  require(cfg.m_max >= cfg.m_min && cfg.m_min >= 0, errc::invalid_argument,
          "sweep needs 0 <= m_min <= m_max");
  require(cfg.horizon > 0.0, errc::invalid_argument,
          "sweep horizon must be positive");
  const double t1 = cfg.t2 - cfg.horizon;

  std::vector<BenchRecord> out;
  for (int m = cfg.m_min; m <= cfg.m_max; ++m) {
    for (doubling_method method :
         {doubling_method::a, doubling_method::b, doubling_method::c}) {
      DoublingSchedule sched{m, cfg.steps, cfg.seed_rk};
      BenchRecord rec;
      rec.method = method_name(method);
      rec.n = prob.n();
      rec.t1 = t1;
      rec.t2 = cfg.t2;
      rec.levels = m;
      rec.steps = cfg.steps;
      rec.seed_rk = cfg.seed_rk;
      rec.h = cfg.horizon / static_cast<double>(cfg.steps);
      rec.flops = flop_model(method, prob.n(), cfg.seed_rk, m, cfg.steps);
      try {
        const auto start = std::chrono::steady_clock::now();
        const Mat p =
            doubling_solve(method, prob, p_terminal, t1, cfg.t2, sched, seed,
                           gate_policy::algebraic, &rec.warnings);
        const auto stop = std::chrono::steady_clock::now();
        rec.runtime_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                .count();
        rec.err = rel_error(p, reference);
      } catch (const solver_error& e) {
        rec.warnings.push_back(std::string("failed: ") + e.what());
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// Scalar showcase: the flow with A = 0, C = Sigma = 1 and p = 0 at the start
// is tan(t) in display time, escaping at t = pi/2 + j pi. Kernel propagation
// steps straight across the poles. Each sample reports the computed value,
// the exact tangent, their relative difference, and whether the sample sits
// within `pole_margin` of a pole (where the relative error of *any*
// representation loses meaning).
struct TanSample {
  double t = 0.0;
  double value = 0.0;
  double exact = 0.0;
  double rel_err = 0.0;
  bool near_pole = false;
};

inline std::vector<TanSample> tan_demo(double horizon, int steps,
                                       double pole_margin = 0.05,
                                       warning_list* warnings = nullptr) {
  require(horizon > 0.0 && std::isfinite(horizon), errc::invalid_argument,
          "tan demo horizon must be positive");
  require(steps >= 1, errc::invalid_argument, "tan demo needs steps >= 1");
  const DreProblem prob = DreProblem::constant(
      Mat::Zero(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1));
  const DualityKernel seed = DualityKernel::identity_seed(1);
  const double dt = horizon / steps;

  // one exact short-span kernel, applied repeatedly on the backward clock
  const BivariateQuadratic bq =
      seed_psq(prob, seed, 0.0, dt, /*seed_rk=*/0, warnings);
  const MaxPlusKernel kernel =
      kernel_from_bivariate(bq, seed, gate_policy::algebraic, warnings);

  std::vector<TanSample> out;
  Mat p = Mat::Zero(1, 1);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * dt;
    if (i > 0) p = kernel_propagate(kernel, p, gate_policy::algebraic, warnings);
    TanSample s;
    s.t = t;
    s.value = p(0, 0);
    s.exact = std::tan(t);
    s.rel_err = std::abs(s.value - s.exact) / (1.0 + std::abs(s.exact));
    const double dist_to_pole =
        std::abs(std::remainder(t - pi / 2.0, pi));
    s.near_pole = dist_to_pole < pole_margin;
    out.push_back(s);
  }
  return out;
}

inline const char* tan_csv_header() { return "t,p,exact,rel_err,near_pole"; }

inline std::string tan_csv_row(const TanSample& s) {
  std::ostringstream os;
  os << fmt_double(s.t) << ',' << fmt_double(s.value) << ','
     << fmt_double(s.exact) << ',' << fmt_double(s.rel_err) << ','
     << (s.near_pole ? 1 : 0);
  return os.str();
}

}  // namespace drekit
