#pragma once

// Bivariate quadratic representation of the Riccati flow. Over an interval
// [t1, t2] the flow of
//
//     -dp/dt = A'p + pA + C + p Sigma p
//
// is generated by a quadratic kernel with blocks (P, S, Q), all n x n and
// P, Q symmetric, evolving in backward time from a seed (P0, S0, Q0) at t2:
//
//     -dP/dt = A'P + PA + C + P Sigma P
//     -dS/dt = (A + Sigma P)' S
//     -dQ/dt = S' Sigma S.
//
// The quadratic transports terminal conditions through
//
//     p(t1) = P1 - S1 (Q1 - Q0 - S0' (p(t2) - P0)^{-1} S0)^{-1} S1',
//
// which stays finite through inversions of the terminal data (see
// kernel.hpp for the kernel form of the same map).

#include <drekit/problem.hpp>
#include <drekit/types.hpp>

#include <cmath>

namespace drekit {

// Quadratic kernel phi(x, z) = 1/2 x'Px + x'Sz + 1/2 z'Qz used as a seed for
// bivariate propagation and as the pivot of semiconvex dual representations.
// S must be invertible for the kernel to define a duality.
struct DualityKernel {
  Mat P;
  Mat S;
  Mat Q;

  static DualityKernel identity_seed(Eigen::Index n) {
    return {Mat::Zero(n, n), Mat::Identity(n, n), Mat::Zero(n, n)};
  }
};

inline void validate_seed(const DualityKernel& phi, Eigen::Index n) {
  require(phi.P.rows() == n && phi.P.cols() == n && phi.S.rows() == n &&
              phi.S.cols() == n && phi.Q.rows() == n && phi.Q.cols() == n,
          errc::dimension_mismatch, "seed kernel blocks must be n x n");
  require(sym_defect(phi.P) <= kSymTol, errc::not_symmetric,
          "seed kernel block P must be symmetric");
  require(sym_defect(phi.Q) <= kSymTol, errc::not_symmetric,
          "seed kernel block Q must be symmetric");
  Eigen::FullPivLU<Mat> lu(phi.S);
  require(lu.isInvertible(), errc::singular,
          "seed kernel block S must be invertible");
}

// Bivariate quadratic over [t1, t2], grown leftward from its seed at t2.
struct BivariateQuadratic {
  Mat P;
  Mat S;
  Mat Q;
  double t1 = 0.0;
  double t2 = 0.0;

  double span() const { return t2 - t1; }
};

struct BivariateDerivative {
  Mat dP;
  Mat dS;
  Mat dQ;
};

// Actual time derivatives (dP/dt etc.) of the bivariate system at time t.
inline BivariateDerivative bivariate_rhs(const DreCoefficients& k, const Mat& p,
                                         const Mat& s, const Mat& q) {
  BivariateDerivative d;
  d.dP = -(k.a.transpose() * p + p * k.a + k.c + p * k.sigma * p);
  d.dS = -((k.a + k.sigma * p).transpose() * s);
  d.dQ = -(s.transpose() * k.sigma * s);
  (void)q;
  return d;
}

namespace detail {

inline void require_interval(double t1, double t2) {
  require(std::isfinite(t1) && std::isfinite(t2), errc::invalid_argument,
          "interval endpoints must be finite");
  require(t2 - t1 >= kMinInterval, errc::empty_interval,
          "interval [t1, t2] must have length >= 1e-10");
}

}  // namespace detail

// Classical RK4 on the coupled (P, S, Q) system, integrating backward from
// the seed at t2 to t1 in `steps` equal steps.
inline BivariateQuadratic rk4_bivariate(const DreProblem& prob,
                                        const DualityKernel& seed, double t1,
                                        double t2, int steps) {
  detail::require_interval(t1, t2);
  require(steps >= 1, errc::invalid_argument, "rk4_bivariate needs steps >= 1");
  validate_seed(seed, prob.n());

  const double h = (t1 - t2) / steps;  // negative: backward integration
  Mat p = seed.P, s = seed.S, q = seed.Q;
  double t = t2;
  for (int i = 0; i < steps; ++i) {
    const DreCoefficients k_beg = prob.at(t);
    const DreCoefficients k_mid = prob.at(t + 0.5 * h);
    const DreCoefficients k_end = prob.at(t + h);

    const auto k1 = bivariate_rhs(k_beg, p, s, q);
    const auto k2 = bivariate_rhs(k_mid, p + 0.5 * h * k1.dP,
                                  s + 0.5 * h * k1.dS, q + 0.5 * h * k1.dQ);
    const auto k3 = bivariate_rhs(k_mid, p + 0.5 * h * k2.dP,
                                  s + 0.5 * h * k2.dS, q + 0.5 * h * k2.dQ);
    const auto k4 = bivariate_rhs(k_end, p + h * k3.dP, s + h * k3.dS,
                                  q + h * k3.dQ);

    p += (h / 6.0) * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    s += (h / 6.0) * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
    q += (h / 6.0) * (k1.dQ + 2.0 * k2.dQ + 2.0 * k3.dQ + k4.dQ);
    p = symmetrized(p);
    q = symmetrized(q);
    t = t2 + (i + 1) * h;
    if (!p.allFinite() || !s.allFinite() || !q.allFinite())
      fail(errc::blowup, "rk4_bivariate: state diverged during integration");
  }
  return {p, s, q, t1, t2};
}

// Classical RK4 directly on p, backward from p(t2) = p_terminal. Reference
// integrator; it runs head-on into finite-time escapes, unlike the bivariate
// route.
inline Mat rk4_dre(const DreProblem& prob, const Mat& p_terminal, double t1,
                   double t2, int steps) {
  detail::require_interval(t1, t2);
  require(steps >= 1, errc::invalid_argument, "rk4_dre needs steps >= 1");
  require(p_terminal.rows() == prob.n() && p_terminal.cols() == prob.n(),
          errc::dimension_mismatch, "terminal value must be n x n");
  require(sym_defect(p_terminal) <= kSymTol, errc::not_symmetric,
          "terminal value must be symmetric");

  const double h = (t1 - t2) / steps;
  Mat p = symmetrized(p_terminal);
  double t = t2;
  for (int i = 0; i < steps; ++i) {
    const DreCoefficients k_beg = prob.at(t);
    const DreCoefficients k_mid = prob.at(t + 0.5 * h);
    const DreCoefficients k_end = prob.at(t + h);

    const Mat k1 = dre_derivative(k_beg, p);
    const Mat k2 = dre_derivative(k_mid, p + 0.5 * h * k1);
    const Mat k3 = dre_derivative(k_mid, p + 0.5 * h * k2);
    const Mat k4 = dre_derivative(k_end, p + h * k3);
    p = symmetrized(p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    t = t2 + (i + 1) * h;
    if (!p.allFinite())
      fail(errc::blowup,
           "rk4_dre: solution escaped in finite time; use a kernel-based "
           "method to continue through the singularity");
  }
  return p;
}

}  // namespace drekit
