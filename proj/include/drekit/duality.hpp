#pragma once

// Semiconvex duality. A quadratic kernel phi(x, z) = 1/2 x'Px + x'Sz +
// 1/2 z'Qz with invertible S pairs each symmetric p (with p - P invertible)
// with a dual symmetric q:
//
//     q = -S'(p - P)^{-1} S - Q,        p = -S (q + Q)^{-1} S' + P,
//
// an involution. Under a fixed kernel the Riccati flow of p corresponds to a
// Riccati flow of q with transformed coefficients; propagating q instead of p
// is what lets doubling methods step across intervals where p itself escapes.

#include <drekit/bivariate.hpp>
#include <drekit/kernel.hpp>
#include <drekit/linalg.hpp>
#include <drekit/problem.hpp>
#include <drekit/types.hpp>

#include <cmath>

namespace drekit {

inline Mat dual_value(const Mat& p, const DualityKernel& phi,
                      warning_list* warnings = nullptr) {
  validate_seed(phi, p.rows());
  require(sym_defect(p) <= kSymTol, errc::not_symmetric,
          "dual_value argument must be symmetric");
  const Mat e = symmetrized(p - phi.P);
  Eigen::FullPivLU<Mat> lu(e);
  if (!lu.isInvertible())
    fail(errc::seed_collision,
         "p - P is singular; this value has no dual in the chosen chart. "
         "Shift the kernel's P block");
  CondReport ei = inverse(e, warnings, "dual chart pivot p - P");
  return symmetrized(-phi.S.transpose() * ei.value * phi.S - phi.Q);
}

inline Mat primal_value(const Mat& q, const DualityKernel& phi,
                        warning_list* warnings = nullptr) {
  validate_seed(phi, q.rows());
  require(sym_defect(q) <= kSymTol, errc::not_symmetric,
          "primal_value argument must be symmetric");
  const Mat e = symmetrized(q + phi.Q);
  Eigen::FullPivLU<Mat> lu(e);
  if (!lu.isInvertible())
    fail(errc::seed_collision,
         "q + Q is singular; this value has no primal in the chosen chart. "
         "Shift the kernel's Q block");
  CondReport ei = inverse(e, warnings, "primal chart pivot q + Q");
  return symmetrized(-phi.S * ei.value * phi.S.transpose() + phi.P);
}

// Backward-time derivatives of the kernel blocks if the kernel itself were
// transported by the flow; holding the kernel fixed instead pushes these
// derivatives into the dual coefficients below.
struct KernelFlowRates {
  Mat rp;  // A'P + PA + C + P Sigma P
  Mat rs;  // (A + Sigma P)' S
  Mat rq;  // S' Sigma S
};

inline KernelFlowRates kernel_flow_rates(const DreCoefficients& k,
                                         const DualityKernel& phi) {
  KernelFlowRates r;
  r.rp = symmetrized(k.a.transpose() * phi.P + phi.P * k.a + k.c +
                     phi.P * k.sigma * phi.P);
  r.rs = (k.a + k.sigma * phi.P).transpose() * phi.S;
  r.rq = symmetrized(phi.S.transpose() * k.sigma * phi.S);
  return r;
}

// Coefficients (A_d, C_d, Sigma_d) of the dual Riccati flow
//
//     -dq/dt = A_d' q + q A_d + C_d + q Sigma_d q
//
// satisfied by q(t) = dual_value(p(t), phi) when p follows the primal flow
// with coefficients k and the kernel phi is held fixed. For the identity
// kernel (P, S, Q) = (0, I, 0) this reduces to the classical swap
// A_d = -A', Sigma_d = C, C_d = Sigma.
inline DreCoefficients dual_coefficients(const DreCoefficients& k,
                                         const DualityKernel& phi) {
  validate_seed(phi, k.a.rows());
  const KernelFlowRates r = kernel_flow_rates(k, phi);
  const Mat si = phi.S.partialPivLu().solve(Mat::Identity(phi.S.rows(), phi.S.cols()));
  const Mat t = symmetrized(si * r.rp * si.transpose());
  const Mat w = si * r.rs;
  DreCoefficients d;
  d.a = t * phi.Q - w;
  d.sigma = t;
  d.c = symmetrized(phi.Q * t * phi.Q - phi.Q * w - w.transpose() * phi.Q + r.rq);
  return d;
}

// Exact identities tying the dual coefficients back to the kernel rates:
//
//     R_P = S Sigma_d S'
//     R_S = S (Sigma_d Q - A_d)
//     R_Q = -A_d' Q - Q A_d + C_d + Q Sigma_d Q.
//
// Returns the largest of the three relative defects; it measures only
// floating-point error of the construction.
inline double matching_residual(const DreCoefficients& k,
                                const DualityKernel& phi,
                                const DreCoefficients& dual) {
  const KernelFlowRates r = kernel_flow_rates(k, phi);
  const Mat rhs_p = phi.S * dual.sigma * phi.S.transpose();
  const Mat rhs_s = phi.S * (dual.sigma * phi.Q - dual.a);
  const Mat rhs_q = -dual.a.transpose() * phi.Q - phi.Q * dual.a + dual.c +
                    phi.Q * dual.sigma * phi.Q;
  const double e1 = (r.rp - rhs_p).norm() / (1.0 + r.rp.norm());
  const double e2 = (r.rs - rhs_s).norm() / (1.0 + r.rs.norm());
  const double e3 = (r.rq - rhs_q).norm() / (1.0 + r.rq.norm());
  return std::max(e1, std::max(e2, e3));
}

// Linear change of variables on the characteristic system that conjugates
// the primal Hamiltonian flow to the dual one: pairs (x, px) map to pairs
// (y, qy). Both K and its closed-form inverse are returned; their product is
// validated against the identity.
struct KernelChangeOfVariables {
  Mat k;      // 2n x 2n
  Mat k_inv;  // closed form, not a numerical inversion
};

inline KernelChangeOfVariables k_matrix(const DualityKernel& phi) {
  validate_seed(phi, phi.P.rows());
  const Eigen::Index n = phi.P.rows();
  const Mat si = phi.S.partialPivLu().solve(Mat::Identity(n, n));
  const Mat sit = si.transpose();
  KernelChangeOfVariables out;
  out.k = Mat::Zero(2 * n, 2 * n);
  out.k.topLeftCorner(n, n) = si * phi.P;
  out.k.topRightCorner(n, n) = -si;
  out.k.bottomLeftCorner(n, n) = phi.S.transpose() - phi.Q * si * phi.P;
  out.k.bottomRightCorner(n, n) = phi.Q * si;
  out.k_inv = Mat::Zero(2 * n, 2 * n);
  out.k_inv.topLeftCorner(n, n) = sit * phi.Q;
  out.k_inv.topRightCorner(n, n) = sit;
  out.k_inv.bottomLeftCorner(n, n) = -phi.S + phi.P * sit * phi.Q;
  out.k_inv.bottomRightCorner(n, n) = phi.P * sit;
  const double defect =
      (out.k * out.k_inv - Mat::Identity(2 * n, 2 * n)).norm();
  if (defect > 1e-10 * (1.0 + out.k.norm() * out.k_inv.norm()))
    fail(errc::singular,
         "kernel change of variables is inconsistent; S is too close to "
         "singular");
  return out;
}

// || K H - H_d K ||_F / (1 + ||H||_F), where H and H_d are the Hamiltonian
// matrices of the primal and dual coefficients. Zero in exact arithmetic.
inline double similarity_residual(const DreCoefficients& k,
                                  const DualityKernel& phi) {
  const DreCoefficients d = dual_coefficients(k, phi);
  const KernelChangeOfVariables cv = k_matrix(phi);
  const Mat h = hamiltonian(k);
  const Mat hd = hamiltonian(d);
  return (cv.k * h - hd * cv.k).norm() / (1.0 + h.norm());
}

// Two-point kernel acting on dual variables: with q2 dual to p(t2) and q1
// dual to p(t1), both under the same fixed kernel phi used as the seed,
//
//     q1 = B11 - B12 (B22 + q2)^{-1} B12'.
//
// Built from the bivariate quadratic over [t1, t2] with E = P1 - P2:
//
//     B11 = -S2' E^{-1} S2 - Q2
//     B12 =  S2' E^{-1} S1
//     B22 = -S1' E^{-1} S1 + Q1.
struct DualKernelB {
  Mat B11;
  Mat B12;
  Mat B22;
  double t1 = 0.0;
  double t2 = 0.0;

  double span() const { return t2 - t1; }
  Eigen::Index n() const { return B11.rows(); }
};

inline DualKernelB dual_kernel(const BivariateQuadratic& bq,
                               const DualityKernel& seed,
                               gate_policy policy = gate_policy::strict,
                               warning_list* warnings = nullptr) {
  validate_seed(seed, bq.P.rows());
  const Mat e = symmetrized(bq.P - seed.P);
  if (!is_positive_definite(e)) {
    if (policy == gate_policy::strict)
      fail(errc::assumption_violation,
           "P spread over the interval is not positive definite; the dual "
           "kernel is not a sup-convolution kernel here. Use "
           "gate_policy::algebraic to build it algebraically");
    warn(warnings,
         "P spread is not positive definite; dual kernel built algebraically");
  }
  const CondReport ei = inverse(e, warnings, "P spread E");
  DualKernelB b;
  b.B11 = symmetrized(-seed.S.transpose() * ei.value * seed.S - seed.Q);
  b.B12 = seed.S.transpose() * ei.value * bq.S;
  b.B22 = symmetrized(-bq.S.transpose() * ei.value * bq.S + bq.Q);
  b.t1 = bq.t1;
  b.t2 = bq.t2;
  return b;
}

inline Mat dual_kernel_propagate(const DualKernelB& b, const Mat& q_terminal,
                                 gate_policy policy = gate_policy::strict,
                                 warning_list* warnings = nullptr) {
  require(q_terminal.rows() == b.n() && q_terminal.cols() == b.n(),
          errc::dimension_mismatch, "dual terminal value must match kernel");
  const Mat pivot = symmetrized(b.B22 + q_terminal);
  detail::gate_negative_definite(pivot, policy, errc::concavity,
                                 "dual propagation pivot B22 + q", warnings);
  const CondReport pi = inverse(pivot, warnings, "dual propagation pivot");
  return symmetrized(b.B11 - b.B12 * pi.value * b.B12.transpose());
}

inline DualKernelB dual_kernel_compose(const DualKernelB& ab,
                                       const DualKernelB& bc,
                                       gate_policy policy = gate_policy::strict,
                                       warning_list* warnings = nullptr) {
  require(ab.n() == bc.n(), errc::dimension_mismatch,
          "dual_kernel_compose: size mismatch");
  require(std::abs(ab.t2 - bc.t1) <= kTimeMatchTol * (1.0 + std::abs(ab.t2)),
          errc::non_adjacent,
          "dual_kernel_compose: intervals are not adjacent");
  const auto z = detail::schur_combine(
      ab.B11, ab.B12, ab.B22, bc.B11, bc.B12, bc.B22, policy, errc::concavity,
      "dual composition pivot B22 + B11", warnings);
  return {z.Z11, z.Z12, z.Z22, ab.t1, bc.t2};
}

inline DualKernelB dual_kernel_shifted(const DualKernelB& b, double delta) {
  DualKernelB out = b;
  out.t1 += delta;
  out.t2 += delta;
  return out;
}

inline DualKernelB dual_kernel_doubled(const DualKernelB& b,
                                       gate_policy policy = gate_policy::strict,
                                       warning_list* warnings = nullptr) {
  return dual_kernel_compose(dual_kernel_shifted(b, -b.span()), b, policy,
                             warnings);
}

}  // namespace drekit
