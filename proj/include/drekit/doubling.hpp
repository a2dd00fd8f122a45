#pragma once

// Doubling solvers for time-invariant terminal-value Riccati problems. All
// three share the schedule: integrate (or evaluate in closed form) the
// bivariate quadratic over one short seed interval of length
// delta = (t2 - t1) / (N 2^M), double its span M times, then apply the
// resulting long-span operator N times to the terminal condition. Cost grows
// with M + N while the covered horizon grows with N 2^M.
//
// The three methods double different representations of the same flow:
//   A: the max-plus kernel (I11, I12, I22),
//   B: the dual-side kernel (B11, B12, B22),
//   C: the bivariate quadratic (P, S, Q) itself.
// They are algebraically equivalent; their rounding behaviour differs, which
// is the point of benchmarking them against each other.

#include <drekit/bivariate.hpp>
#include <drekit/duality.hpp>
#include <drekit/kernel.hpp>
#include <drekit/problem.hpp>
#include <drekit/transition.hpp>
#include <drekit/types.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace drekit {

struct DoublingSchedule {
  int levels = 0;   // M: number of span doublings
  int steps = 1;    // N: applications of the doubled operator
  int seed_rk = 1;  // RK4 substeps for the seed; 0 = closed-form seed

  double delta(double t1, double t2) const {
    return (t2 - t1) / (static_cast<double>(steps) * std::exp2(levels));
  }
};

inline void validate_schedule(const DoublingSchedule& s) {
  require(s.levels >= 0 && s.levels <= 62, errc::invalid_argument,
          "doubling levels must be in [0, 62]");
  require(s.steps >= 1, errc::invalid_argument,
          "schedule needs at least one propagation step");
  require(s.seed_rk >= 0, errc::invalid_argument,
          "seed substep count must be >= 0");
}

// Spectral radius of a square matrix (largest eigenvalue modulus).
inline double spectral_radius(const Mat& m) {
  require_square(m, "spectral_radius argument");
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    fail(errc::singular, "spectral_radius: eigendecomposition failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Bivariate quadratic over the seed interval [t2 - delta, t2]. seed_rk >= 1
// integrates the (P, S, Q) system with that many RK4 substeps; seed_rk = 0
// uses the closed-form route through exp(-H delta), which requires a
// time-invariant problem. The closed form is used only while
// rho(H) delta <= 20 (rho the spectral radius); beyond that the squaring
// phase of the exponential amplifies rounding, so the seed falls back to RK4
// with a warning.
inline BivariateQuadratic seed_psq(const DreProblem& prob,
                                   const DualityKernel& seed, double t2,
                                   double delta, int seed_rk,
                                   warning_list* warnings = nullptr) {
  require(delta >= kMinInterval, errc::empty_interval,
          "seed interval must have length >= 1e-10");
  if (seed_rk >= 1)
    return rk4_bivariate(prob, seed, t2 - delta, t2, seed_rk);
  require(prob.time_invariant(), errc::invalid_argument,
          "closed-form seeding (seed_rk = 0) requires a time-invariant "
          "problem; use seed_rk >= 1");
  const double rho = spectral_radius(hamiltonian_at(prob, t2));
  if (rho * delta <= 20.0)
    return psq_from_transition(transition(prob, t2 - delta, t2), seed,
                               warnings);
  const int fallback = static_cast<int>(std::ceil(rho * delta / 0.01));
  std::ostringstream os;
  os << "closed-form seed rejected (spectral radius * delta = " << rho * delta
     << " > 20); falling back to " << fallback << " RK4 substeps";
  warn(warnings, os.str());
  return rk4_bivariate(prob, seed, t2 - delta, t2, fallback);
}

// Doubles the span of a time-invariant bivariate quadratic in place of
// recomputing it: with (Pc, Sc, Qc) the current span and (P0, S0, Q0) its
// seed,
//
//     G   = (Q0 - Qc) + S0'(Pc - P0)^{-1} S0
//     P2  = Pc + Sc G^{-1} Sc'
//     S2  = Sc G^{-1} S0' (Pc - P0)^{-1} Sc
//     F   = (P0 - Pc) + S0 (Qc - Q0)^{-1} S0'
//     Q2  = Qc + Sc' F^{-1} Sc.
//
// strict mode requires the spreads Pc - P0 and Qc - Q0 positive definite,
// the regime where the underlying sup-convolutions are bounded.
inline BivariateQuadratic bivariate_doubled(const BivariateQuadratic& bq,
                                            const DualityKernel& seed,
                                            gate_policy policy = gate_policy::strict,
                                            warning_list* warnings = nullptr) {
  validate_seed(seed, bq.P.rows());
  const Mat e = symmetrized(bq.P - seed.P);
  const Mat d = symmetrized(bq.Q - seed.Q);
  if (policy == gate_policy::strict) {
    if (!is_positive_definite(e))
      fail(errc::assumption_violation,
           "P spread is not positive definite; doubling leaves the "
           "sup-convolution regime (use gate_policy::algebraic)");
    if (!is_positive_definite(d))
      fail(errc::degenerate_interval,
           "Q spread is not positive definite; doubling leaves the "
           "sup-convolution regime (use gate_policy::algebraic)");
  }
  const CondReport ei = inverse(e, warnings, "P spread");
  const CondReport di = inverse(d, warnings, "Q spread");
  const Mat g =
      symmetrized(seed.Q - bq.Q + seed.S.transpose() * ei.value * seed.S);
  const Mat f =
      symmetrized(seed.P - bq.P + seed.S * di.value * seed.S.transpose());
  const CondReport gi = inverse(g, warnings, "doubling pivot G");
  const CondReport fi = inverse(f, warnings, "doubling pivot F");
  BivariateQuadratic out;
  out.P = symmetrized(bq.P + bq.S * gi.value * bq.S.transpose());
  out.S = bq.S * gi.value * seed.S.transpose() * ei.value * bq.S;
  out.Q = symmetrized(bq.Q + bq.S.transpose() * fi.value * bq.S);
  out.t1 = bq.t2 - 2.0 * bq.span();
  out.t2 = bq.t2;
  return out;
}

namespace detail {

inline void require_doubling_inputs(const DreProblem& prob,
                                    const Mat& p_terminal, double t1, double t2,
                                    const DoublingSchedule& sched) {
  require_interval(t1, t2);
  validate_schedule(sched);
  require(prob.time_invariant(), errc::invalid_argument,
          "doubling methods require a time-invariant problem");
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");
}

}  // namespace detail

// Method A: double the max-plus kernel, then push the terminal value through
// it N times.
inline Mat method_a_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          const DualityKernel& seed,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  detail::require_doubling_inputs(prob, p_terminal, t1, t2, sched);
  const double delta = sched.delta(t1, t2);
  const BivariateQuadratic bq =
      seed_psq(prob, seed, t2, delta, sched.seed_rk, warnings);
  MaxPlusKernel k = kernel_from_bivariate(bq, seed, policy, warnings);
  for (int i = 0; i < sched.levels; ++i)
    k = kernel_doubled(k, policy, warnings);
  Mat p = symmetrized(p_terminal);
  for (int j = 0; j < sched.steps; ++j)
    p = kernel_propagate(k, p, policy, warnings);
  return p;
}

inline Mat method_a_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  return method_a_solve(prob, p_terminal, t1, t2, sched,
                        DualityKernel::identity_seed(prob.n()), policy,
                        warnings);
}

// Method B: double the dual kernel; each propagation step dualizes the
// running value, pushes the dual through the kernel, and maps back.
inline Mat method_b_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          const DualityKernel& seed,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  detail::require_doubling_inputs(prob, p_terminal, t1, t2, sched);
  const double delta = sched.delta(t1, t2);
  const BivariateQuadratic bq =
      seed_psq(prob, seed, t2, delta, sched.seed_rk, warnings);
  DualKernelB b = dual_kernel(bq, seed, policy, warnings);
  for (int i = 0; i < sched.levels; ++i)
    b = dual_kernel_doubled(b, policy, warnings);
  Mat p = symmetrized(p_terminal);
  for (int j = 0; j < sched.steps; ++j) {
    Mat q = dual_value(p, seed, warnings);
    q = dual_kernel_propagate(b, q, policy, warnings);
    p = primal_value(q, seed, warnings);
  }
  return p;
}

inline Mat method_b_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  return method_b_solve(prob, p_terminal, t1, t2, sched,
                        DualityKernel::identity_seed(prob.n()), policy,
                        warnings);
}

// Method C: double the bivariate quadratic itself and propagate through the
// long-span quadratic without ever forming a kernel.
inline Mat method_c_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          const DualityKernel& seed,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  detail::require_doubling_inputs(prob, p_terminal, t1, t2, sched);
  const double delta = sched.delta(t1, t2);
  BivariateQuadratic bq =
      seed_psq(prob, seed, t2, delta, sched.seed_rk, warnings);
  for (int i = 0; i < sched.levels; ++i)
    bq = bivariate_doubled(bq, seed, policy, warnings);
  Mat p = symmetrized(p_terminal);
  for (int j = 0; j < sched.steps; ++j)
    p = propagate_via_psq(bq, seed, p, warnings);
  return p;
}

inline Mat method_c_solve(const DreProblem& prob, const Mat& p_terminal,
                          double t1, double t2, const DoublingSchedule& sched,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  return method_c_solve(prob, p_terminal, t1, t2, sched,
                        DualityKernel::identity_seed(prob.n()), policy,
                        warnings);
}

enum class doubling_method { a, b, c };

inline const char* method_name(doubling_method m) {
  switch (m) {
    case doubling_method::a: return "a";
    case doubling_method::b: return "b";
    case doubling_method::c: return "c";
  }
  return "?";
}

inline Mat doubling_solve(doubling_method method, const DreProblem& prob,
                          const Mat& p_terminal, double t1, double t2,
                          const DoublingSchedule& sched,
                          const DualityKernel& seed,
                          gate_policy policy = gate_policy::algebraic,
                          warning_list* warnings = nullptr) {
  switch (method) {
    case doubling_method::a:
      return method_a_solve(prob, p_terminal, t1, t2, sched, seed, policy,
                            warnings);
    case doubling_method::b:
      return method_b_solve(prob, p_terminal, t1, t2, sched, seed, policy,
                            warnings);
    case doubling_method::c:
      return method_c_solve(prob, p_terminal, t1, t2, sched, seed, policy,
                            warnings);
  }
  fail(errc::invalid_argument, "unknown doubling method");
}

// Exact rational scalar for the operation-count model below; the model's
// coefficients have denominator 3 and every evaluation must come out an
// integer, which the tests check exactly rather than in floating point.
class Rational {
 public:
  Rational() = default;
  Rational(long long num, long long den = 1) : num_(num), den_(den) {
    require(den != 0, errc::invalid_argument, "Rational with zero denominator");
    normalize();
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  Rational operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
  }
  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  long long num_ = 0;
  long long den_ = 1;
};

// Leading-order floating-point operation counts of the three methods as a
// function of dimension n and schedule (levels M, steps N, seed substeps
// Nrk). Seeding costs 32n^3 + 3n^2 per RK4 substep for every method; the
// doubling and propagation phases differ:
//
//   A: (M + 1)(16n^2 + 37n^3/3 + 11n/3) + N(18n^2 + 19n^3/3 + 11n/3)
//   B: (M + 1)(16n^2 + 37n^3/3 + 11n/3) + N(54n^2 + 19n^3 + 11n)
//   C:  M(67n^2 + 94n^3/3 + 44n/3)      + N(36n^2 + 38n^3/3 + 22n/3)
//
// (A and B double structurally identical kernels, so their per-level cost
// matches; B pays for the dual/primal hops on every propagation step, while
// C's doubling carries four inversions but its propagation stays light.)
inline Rational flop_model(doubling_method method, long long n, long long nrk,
                           long long levels, long long steps) {
  require(n >= 1 && nrk >= 0 && levels >= 0 && steps >= 1,
          errc::invalid_argument, "flop_model: invalid schedule");
  const Rational n1(n), n2(n * n), n3(n * n * n);
  const Rational seed = Rational(nrk) * (Rational(32) * n3 + Rational(3) * n2);
  const Rational kernel_level =
      Rational(16) * n2 + Rational(37, 3) * n3 + Rational(11, 3) * n1;
  switch (method) {
    case doubling_method::a: {
      const Rational prop =
          Rational(18) * n2 + Rational(19, 3) * n3 + Rational(11, 3) * n1;
      return seed + Rational(levels + 1) * kernel_level +
             Rational(steps) * prop;
    }
    case doubling_method::b: {
      const Rational prop =
          Rational(54) * n2 + Rational(19) * n3 + Rational(11) * n1;
      return seed + Rational(levels + 1) * kernel_level +
             Rational(steps) * prop;
    }
    case doubling_method::c: {
      const Rational level =
          Rational(67) * n2 + Rational(94, 3) * n3 + Rational(44, 3) * n1;
      const Rational prop =
          Rational(36) * n2 + Rational(38, 3) * n3 + Rational(22, 3) * n1;
      return seed + Rational(levels) * level + Rational(steps) * prop;
    }
  }
  fail(errc::invalid_argument, "unknown doubling method");
}

}  // namespace drekit
