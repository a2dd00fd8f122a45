#pragma once

// Transition matrices of the characteristic Hamiltonian system
//
//     d/dt [u; v] = H(t) [u; v],    H = [[A, Sigma], [-C, -A']],
//
// integrated backward from t2 to t1. A terminal pair (u, v)(t2) = (I, p2)
// transported by Phi = Phi(t1, t2) reproduces the Riccati solution as
// p(t1) = V U^{-1} (the fundamental-solution method), and Phi also yields
// the bivariate quadratic over [t1, t2] in closed form.

#include <drekit/bivariate.hpp>
#include <drekit/expm.hpp>
#include <drekit/linalg.hpp>
#include <drekit/problem.hpp>

#include <cmath>

namespace drekit {

struct HamiltonianTransition {
  Mat phi;  // 2n x 2n, maps (u, v)(t2) to (u, v)(t1)
  double t1 = 0.0;
  double t2 = 0.0;

  Eigen::Index n() const { return phi.rows() / 2; }
  Mat p11() const { return phi.topLeftCorner(n(), n()); }
  Mat p12() const { return phi.topRightCorner(n(), n()); }
  Mat p21() const { return phi.bottomLeftCorner(n(), n()); }
  Mat p22() const { return phi.bottomRightCorner(n(), n()); }
};

// || Phi' J Phi - J ||_F with J = [[0, I], [-I, 0]]. Exact transition matrices
// of a Hamiltonian system are symplectic, so this measures integration error.
inline double symplectic_defect(const HamiltonianTransition& tr) {
  const Eigen::Index n = tr.n();
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return (tr.phi.transpose() * j * tr.phi - j).norm();
}

// Phi(t1, t2) for t1 < t2. Time-invariant problems use the matrix exponential
// exp(-H (t2 - t1)); otherwise the matrix ODE dX/dt = H(t) X is integrated
// with RK4 from X(t2) = I in `steps` steps (steps = 0 picks a default of 100
// steps per unit time, at least 100).
inline HamiltonianTransition transition(const DreProblem& prob, double t1,
                                        double t2, int steps = 0) {
  detail::require_interval(t1, t2);
  if (prob.time_invariant() && steps == 0) {
    const Mat h = hamiltonian_at(prob, t2);
    return {mat_exp(-(t2 - t1) * h), t1, t2};
  }
  if (steps == 0)
    steps = std::max(100, static_cast<int>(std::ceil(100.0 * (t2 - t1))));
  const double h = (t1 - t2) / steps;
  const Eigen::Index n = prob.n();
  Mat x = Mat::Identity(2 * n, 2 * n);
  double t = t2;
  for (int i = 0; i < steps; ++i) {
    const Mat h_beg = hamiltonian_at(prob, t);
    const Mat h_mid = hamiltonian_at(prob, t + 0.5 * h);
    const Mat h_end = hamiltonian_at(prob, t + h);
    const Mat k1 = h_beg * x;
    const Mat k2 = h_mid * (x + 0.5 * h * k1);
    const Mat k3 = h_mid * (x + 0.5 * h * k2);
    const Mat k4 = h_end * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t2 + (i + 1) * h;
    if (!x.allFinite())
      fail(errc::blowup, "transition: integration diverged");
  }
  return {x, t1, t2};
}

// Bivariate quadratic over [t1, t2] obtained by pushing the seed at t2
// through the transition matrix:
//
//     G  = Phi11 + Phi12 P2
//     P1 = (Phi21 + Phi22 P2) G^{-1}
//     S1 = G^{-T} S2
//     Q1 = Q2 - S2' G^{-1} Phi12 S2.
//
// This route never steps through the interior of the interval, so it is the
// O(log) building block for time-invariant problems.
inline BivariateQuadratic psq_from_transition(const HamiltonianTransition& tr,
                                              const DualityKernel& seed,
                                              warning_list* warnings = nullptr) {
  validate_seed(seed, tr.n());
  const Mat g = tr.p11() + tr.p12() * seed.P;
  const CondReport gi = inverse(g, warnings, "transition factor Phi11 + Phi12*P");
  BivariateQuadratic out;
  out.P = symmetrized((tr.p21() + tr.p22() * seed.P) * gi.value);
  out.S = gi.value.transpose() * seed.S;
  out.Q = symmetrized(seed.Q -
                      seed.S.transpose() * gi.value * tr.p12() * seed.S);
  out.t1 = tr.t1;
  out.t2 = tr.t2;
  return out;
}

// Fundamental-solution (Davison-Maki) step over [t1, t2]:
// p(t1) = (Phi21 + Phi22 p2)(Phi11 + Phi12 p2)^{-1}. The reported rcond is
// that of the inverted factor; near a finite-time escape it collapses.
inline CondReport davison_maki(const DreProblem& prob, const Mat& p_terminal,
                               double t1, double t2, int steps = 0,
                               warning_list* warnings = nullptr) {
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");
  const HamiltonianTransition tr = transition(prob, t1, t2, steps);
  const Mat p2 = symmetrized(p_terminal);
  const Mat u = tr.p11() + tr.p12() * p2;
  const Mat v = tr.p21() + tr.p22() * p2;
  CondReport ui = inverse(u, warnings, "fundamental-solution factor U");
  CondReport out;
  out.value = symmetrized(v * ui.value);
  out.rcond = ui.rcond;
  out.warned = ui.warned;
  return out;
}

}  // namespace drekit
