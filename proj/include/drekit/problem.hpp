#pragma once

// Problem descriptions for the terminal-value matrix Riccati equation
//
//     -dp/dt = A(t)' p + p A(t) + C(t) + p Sigma(t) p.
//
// Coefficients are supplied either as a callback of time or as constants.
// Sigma is required positive semidefinite unless `relax_psd` is set; several
// benchmark families (notably the stiff one built in bench.hpp) use an
// indefinite Sigma on purpose, and the propagation algebra does not care.

#include <drekit/linalg.hpp>
#include <drekit/types.hpp>

#include <functional>
#include <utility>

namespace drekit {

struct DreCoefficients {
  Mat a;
  Mat c;
  Mat sigma;
};

class DreProblem {
 public:
  using CoefficientFn = std::function<DreCoefficients(double)>;

  DreProblem(Eigen::Index n, CoefficientFn fn, bool time_invariant = false,
             bool relax_psd = false)
      : n_(n),
        fn_(std::move(fn)),
        time_invariant_(time_invariant),
        relax_psd_(relax_psd) {
    require(n_ >= 1, errc::invalid_argument, "state dimension must be >= 1");
    require(static_cast<bool>(fn_), errc::invalid_argument,
            "coefficient callback must be set");
  }

  static DreProblem constant(const Mat& a, const Mat& c, const Mat& sigma,
                             bool relax_psd = false) {
    require_square(a, "A");
    require_same_shape(a, c, "A and C");
    require_same_shape(a, sigma, "A and Sigma");
    DreCoefficients coeff{a, symmetrized(c), symmetrized(sigma)};
    return DreProblem(
        a.rows(), [coeff](double) { return coeff; }, true, relax_psd);
  }

  Eigen::Index n() const { return n_; }
  bool time_invariant() const { return time_invariant_; }
  bool relax_psd() const { return relax_psd_; }

  // Coefficients at time t, validated: square and consistently sized, C and
  // Sigma symmetric, Sigma PSD unless relaxed.
  DreCoefficients at(double t) const {
    DreCoefficients k = fn_(t);
    require_square(k.a, "A(t)");
    require_same_shape(k.a, k.c, "A(t) and C(t)");
    require_same_shape(k.a, k.sigma, "A(t) and Sigma(t)");
    require(k.a.rows() == n_, errc::dimension_mismatch,
            "coefficient size disagrees with declared dimension");
    require(sym_defect(k.c) <= kSymTol, errc::not_symmetric,
            "C(t) must be symmetric");
    require(sym_defect(k.sigma) <= kSymTol, errc::not_symmetric,
            "Sigma(t) must be symmetric");
    k.c = symmetrized(k.c);
    k.sigma = symmetrized(k.sigma);
    if (!relax_psd_ && !is_positive_semidefinite(k.sigma))
      fail(errc::not_psd,
           "Sigma(t) must be positive semidefinite (set relax_psd to allow "
           "indefinite quadratic terms)");
    return k;
  }

 private:
  Eigen::Index n_;
  CoefficientFn fn_;
  bool time_invariant_;
  bool relax_psd_;
};

// Hamiltonian matrix of the flow at time t:
//
//     H = [  A     Sigma ]
//         [ -C     -A'   ].
inline Mat hamiltonian(const DreCoefficients& k) {
  const Eigen::Index n = k.a.rows();
  Mat h = Mat::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = k.a;
  h.topRightCorner(n, n) = k.sigma;
  h.bottomLeftCorner(n, n) = -k.c;
  h.bottomRightCorner(n, n) = -k.a.transpose();
  return h;
}

inline Mat hamiltonian_at(const DreProblem& prob, double t) {
  return hamiltonian(prob.at(t));
}

// Right-hand side of dp/dt for the terminal-value problem (note the sign:
// integrating toward smaller t with this derivative moves away from the
// terminal condition).
inline Mat dre_derivative(const DreCoefficients& k, const Mat& p) {
  return -(k.a.transpose() * p + p * k.a + k.c + p * k.sigma * p);
}

}  // namespace drekit
