#pragma once

// Closed-form solvers for time-invariant problems, expressed through
// stationary (algebraic Riccati) solutions. Both give the exact flow in one
// evaluation per horizon; they serve as cross-checks for the doubling
// methods and as fast solvers when the algebraic equation is tractable.

#include <drekit/expm.hpp>
#include <drekit/linalg.hpp>
#include <drekit/problem.hpp>
#include <drekit/types.hpp>

#include <optional>

namespace drekit {

// Closed form built from both extremal stationary solutions P+ and P-:
// with G = exp(t (A + Sigma P+)) and Q0 = (P+ - P-)^{-1},
//
//     p(t2 - t) = P+ - G' [ G Q0 G' - Q0 - (p(t2) - P+)^{-1} ]^{-1} G.
//
// Requires the Hamiltonian dichotomy (no imaginary-axis eigenvalues), which
// is exactly when the extremal pair exists.
inline Mat leipnik_solve(const DreProblem& prob, const Mat& p_terminal,
                         double t1, double t2,
                         warning_list* warnings = nullptr) {
  detail::require_interval(t1, t2);
  require(prob.time_invariant(), errc::invalid_argument,
          "leipnik_solve requires a time-invariant problem");
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");

  const DreCoefficients k = prob.at(t2);
  const CareSolutions care = care_extremal_solutions(k.a, k.c, k.sigma);
  const Mat p2 = symmetrized(p_terminal);
  if (rel_error(p2, care.p_plus) < 1e-13) return care.p_plus;

  const double t = t2 - t1;
  const Mat g = mat_exp(t * (k.a + k.sigma * care.p_plus));
  const Mat q0 = inverse(symmetrized(care.p_plus - care.p_minus), warnings,
                         "extremal gap P+ - P-")
                     .value;
  const Mat off = symmetrized(p2 - care.p_plus);
  Eigen::FullPivLU<Mat> lu(off);
  if (!lu.isInvertible())
    fail(errc::seed_collision,
         "terminal value has a singular offset from the antistable "
         "stationary solution; this closed form is undefined for it");
  const Mat inner =
      symmetrized(g * q0 * g.transpose() - q0 - lu.inverse());
  Eigen::FullPivLU<Mat> lui(inner);
  if (!lui.isInvertible())
    fail(errc::blowup,
         "solution escapes in finite time at this horizon (closed-form pivot "
         "singular)");
  CondReport ii = inverse(inner, warnings, "closed-form pivot");
  return symmetrized(care.p_plus - g.transpose() * ii.value * g);
}

// Closed form around a single stationary solution P: with pbar = p(t2) - P,
// E = exp(t (A + Sigma P)) and V = int_0^t exp(s (A+Sigma P)) Sigma
// exp(s (A+Sigma P)') ds,
//
//     p(t2 - t) = P + E' pbar (I - V pbar)^{-1} E.
//
// Any stationary solution works; by default the stable extremal one is used
// for conditioning, and a zero C admits P = 0 even when the extremal pair
// does not exist. The limit A + Sigma P = 0 needs no special casing: E = I
// and V = t Sigma reduce the formula to pbar (I - t Sigma pbar)^{-1}.
inline Mat rusnak_solve(const DreProblem& prob, const Mat& p_terminal,
                        double t1, double t2,
                        std::optional<Mat> stationary = std::nullopt,
                        warning_list* warnings = nullptr) {
  detail::require_interval(t1, t2);
  require(prob.time_invariant(), errc::invalid_argument,
          "rusnak_solve requires a time-invariant problem");
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");

  const DreCoefficients k = prob.at(t2);
  Mat p;
  if (stationary.has_value()) {
    p = symmetrized(*stationary);
    require(p.rows() == prob.n() && p.cols() == prob.n(),
            errc::dimension_mismatch, "stationary solution must be n x n");
    const Mat res =
        k.a.transpose() * p + p * k.a + k.c + p * k.sigma * p;
    require(res.norm() <= 1e-8 * (1.0 + p.norm() * p.norm()),
            errc::invalid_argument,
            "supplied matrix is not a stationary solution");
  } else if (k.c.norm() == 0.0) {
    p = Mat::Zero(prob.n(), prob.n());
  } else {
    p = care_extremal_solutions(k.a, k.c, k.sigma).p_minus;
  }

  const double t = t2 - t1;
  const Mat acl = k.a + k.sigma * p;
  const Mat e = mat_exp(t * acl);
  const Mat v = van_loan_integral(acl.transpose(), k.sigma, t);
  const Mat pbar = symmetrized(p_terminal) - p;
  const Mat pivot = Mat::Identity(prob.n(), prob.n()) - v * pbar;
  Eigen::FullPivLU<Mat> lu(pivot);
  if (!lu.isInvertible())
    fail(errc::blowup,
         "solution escapes in finite time at this horizon (closed-form pivot "
         "singular)");
  CondReport pi = inverse(pivot, warnings, "closed-form pivot I - V pbar");
  return symmetrized(p + e.transpose() * pbar * pi.value * e);
}

}  // namespace drekit
