#pragma once

// Dense linear-algebra helpers: conditioned inversion, eigenvalue-based
// pseudo-inverse and definiteness tests, a continuous Lyapunov solver, and
// extremal solutions of the algebraic Riccati equation.

#include <drekit/expm.hpp>
#include <drekit/types.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

namespace drekit {

// Relative Frobenius error with an absolute floor, so comparisons against a
// zero reference stay meaningful.
inline double rel_error(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "rel_error operands");
  return (a - b).norm() / (1.0 + b.norm());
}

inline double one_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Explicit inverse with a reciprocal condition number in the 1-norm. The
// matrix sizes in this library are small, so forming the inverse and the exact
// rcond = 1/(||A||_1 ||A^{-1}||_1) is cheaper than an estimator and exact.
inline CondReport inverse(const Mat& a, warning_list* warnings = nullptr,
                          const char* what = "matrix") {
  require_square(a, what);
  CondReport out;
  Eigen::PartialPivLU<Mat> lu(a);
  out.value = lu.solve(Mat::Identity(a.rows(), a.cols()));
  if (!out.value.allFinite())
    fail(errc::singular, std::string(what) + " is singular");
  const double na = one_norm(a);
  const double ni = one_norm(out.value);
  out.rcond = (na > 0.0 && ni > 0.0) ? 1.0 / (na * ni) : 0.0;
  if (out.rcond < kCondWarnTol) {
    if (out.rcond == 0.0 || !std::isfinite(out.rcond))
      fail(errc::singular, std::string(what) + " is singular");
    out.warned = true;
    std::ostringstream os;
    os << what << " is ill-conditioned (rcond=" << out.rcond << ")";
    warn(warnings, os.str());
  }
  return out;
}

struct Eigendecomposition {
  Vec values;   // ascending
  Mat vectors;  // orthonormal columns
};

inline Eigendecomposition sym_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(m));
  if (es.info() != Eigen::Success)
    fail(errc::singular, "symmetric eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double definiteness_tol(const Mat& m, double scale = kSymTol) {
  return scale * (1.0 + m.norm());
}

inline bool is_positive_definite(const Mat& m, double tol_scale = kSymTol) {
  const auto e = sym_eig(m);
  return e.values.minCoeff() > definiteness_tol(m, tol_scale);
}

inline bool is_negative_definite(const Mat& m, double tol_scale = kSymTol) {
  const auto e = sym_eig(m);
  return e.values.maxCoeff() < -definiteness_tol(m, tol_scale);
}

inline bool is_positive_semidefinite(const Mat& m, double tol_scale = kSymTol) {
  const auto e = sym_eig(m);
  return e.values.minCoeff() >= -definiteness_tol(m, tol_scale);
}

struct PseudoInverse {
  Mat value;
  Mat range_basis;  // orthonormal basis of the range (columns)
  Eigen::Index rank = 0;
};

// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition.
// Eigenvalues below rank_tol * max|eigenvalue| are treated as zero.
inline PseudoInverse pseudo_inverse(const Mat& m, double rank_tol = 1e-11) {
  require_square(m, "pseudo_inverse argument");
  const auto e = sym_eig(m);
  const Eigen::Index n = m.rows();
  const double cutoff =
      rank_tol * std::max(1e-300, e.values.cwiseAbs().maxCoeff());
  PseudoInverse out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(e.values(i)) > cutoff) keep.push_back(i);
  out.rank = static_cast<Eigen::Index>(keep.size());
  out.range_basis.resize(n, out.rank);
  Vec inv_vals(out.rank);
  for (Eigen::Index j = 0; j < out.rank; ++j) {
    out.range_basis.col(j) = e.vectors.col(keep[j]);
    inv_vals(j) = 1.0 / e.values(keep[j]);
  }
  out.value = out.range_basis * inv_vals.asDiagonal() * out.range_basis.transpose();
  out.value = symmetrized(out.value);
  return out;
}

// Solves A' X + X A + C = 0 for symmetric C via complex Schur reduction of A
// and back-substitution over the triangular factor, column by column.
inline Mat lyapunov_solve(const Mat& a, const Mat& c) {
  require_square(a, "lyapunov_solve A");
  require_same_shape(a, c, "lyapunov_solve A and C");
  const Eigen::Index n = a.rows();
  if (n == 0) return Mat(0, 0);

  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  Eigen::ComplexSchur<Mat> schur(a.transpose());
  if (schur.info() != Eigen::Success)
    fail(errc::singular, "lyapunov_solve: Schur decomposition failed");
  const CMat t = schur.matrixT();  // upper triangular, B = A' = U T U^H
  const CMat u = schur.matrixU();

  // B X + X B' + C = 0 with B = A'. Substitute X = U Y U^H:
  // T Y + Y T^H + F = 0, F = U^H C U. Solve for columns of Y from the last
  // one upward; column k satisfies (T + conj(T_kk) I) y_k = -f_k - sum_{j>k}
  // y_j conj(T_kj).
  const CMat f = u.adjoint() * symmetrized(c) * u;
  CMat y = CMat::Zero(n, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    CVec rhs = -f.col(k);
    for (Eigen::Index j = k + 1; j < n; ++j)
      rhs -= y.col(j) * std::conj(t(k, j));
    CMat lhs = t;
    const std::complex<double> shift = std::conj(t(k, k));
    for (Eigen::Index i = 0; i < n; ++i) {
      lhs(i, i) += shift;
      if (std::abs(lhs(i, i)) < 1e-14 * (1.0 + std::abs(t(i, i))))
        fail(errc::singular,
             "lyapunov_solve: spectrum of A is not shift-invertible "
             "(eigenvalue pair summing to zero)");
    }
    y.col(k) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  const CMat x = u * y * u.adjoint();
  Mat out = x.real();
  if (x.imag().norm() > 1e-8 * (1.0 + out.norm()))
    fail(errc::singular, "lyapunov_solve: solution has large imaginary part");
  return symmetrized(out);
}

struct CareSolutions {
  Mat p_plus;   // antistable solution: A + Sigma * p_plus has eigenvalues in C+
  Mat p_minus;  // stable solution: A + Sigma * p_minus has eigenvalues in C-
};

namespace detail {

inline Mat care_residual(const Mat& a, const Mat& c, const Mat& sigma,
                         const Mat& p) {
  return a.transpose() * p + p * a + c + p * sigma * p;
}

// One realified invariant-subspace extraction: collect eigenvectors of the
// Hamiltonian whose eigenvalues satisfy `take`, using Re/Im parts once per
// conjugate pair, orthonormalize, and form P = X2 X1^{-1}.
template <class Take>
Mat care_subspace_solution(const Eigen::EigenSolver<Mat>& es, Eigen::Index n,
                           Take take) {
  using CMat = Eigen::MatrixXcd;
  const CMat v = es.eigenvectors();
  const Eigen::VectorXcd lam = es.eigenvalues();
  Mat basis(2 * n, 0);
  std::vector<bool> used(static_cast<size_t>(2 * n), false);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (used[static_cast<size_t>(i)] || !take(lam(i))) continue;
    used[static_cast<size_t>(i)] = true;
    if (std::abs(lam(i).imag()) < 1e-12 * (1.0 + std::abs(lam(i)))) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v.col(i).real();
    } else {
      // mark the conjugate partner as consumed
      for (Eigen::Index j = i + 1; j < 2 * n; ++j) {
        if (!used[static_cast<size_t>(j)] &&
            std::abs(lam(j) - std::conj(lam(i))) <
                1e-8 * (1.0 + std::abs(lam(i)))) {
          used[static_cast<size_t>(j)] = true;
          break;
        }
      }
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 2);
      basis.col(basis.cols() - 2) = v.col(i).real();
      basis.col(basis.cols() - 1) = v.col(i).imag();
    }
  }
  if (basis.cols() != n)
    fail(errc::subspace_extraction,
         "algebraic Riccati equation: invariant subspace has wrong dimension");
  Eigen::HouseholderQR<Mat> qr(basis);
  Mat q = qr.householderQ() * Mat::Identity(2 * n, n);
  const Mat x1 = q.topRows(n);
  const Mat x2 = q.bottomRows(n);
  Eigen::FullPivLU<Mat> lu(x1);
  if (!lu.isInvertible())
    fail(errc::subspace_extraction,
         "algebraic Riccati equation: subspace basis has singular top block");
  return symmetrized(x2 * lu.inverse());
}

}  // namespace detail

// Extremal symmetric solutions of A' P + P A + C + P Sigma P = 0, obtained
// from the stable and antistable invariant subspaces of the Hamiltonian
// H = [[A, Sigma], [-C, -A']], each refined by a few Newton steps (Kleinman
// iteration) to working accuracy.
inline CareSolutions care_extremal_solutions(const Mat& a, const Mat& c,
                                             const Mat& sigma) {
  require_square(a, "care A");
  require_same_shape(a, c, "care A and C");
  require_same_shape(a, sigma, "care A and Sigma");
  const Eigen::Index n = a.rows();
  Mat h = Mat::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = symmetrized(sigma);
  h.bottomLeftCorner(n, n) = -symmetrized(c);
  h.bottomRightCorner(n, n) = -a.transpose();

  Eigen::EigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success)
    fail(errc::subspace_extraction, "Hamiltonian eigendecomposition failed");
  const Eigen::VectorXcd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(lam(i).real()) <= 1e-10 * (1.0 + std::abs(lam(i))))
      fail(errc::no_dichotomy,
           "Hamiltonian has eigenvalues on the imaginary axis; extremal "
           "solutions do not exist");
  }

  auto polish = [&](Mat p) {
    for (int it = 0; it < 3; ++it) {
      const Mat r = detail::care_residual(a, c, sigma, p);
      const double res = r.norm();
      if (res <= 1e-12 * (1.0 + p.norm() * p.norm())) break;
      // Newton step: (A + Sigma P)' D + D (A + Sigma P) = -R(P)
      const Mat acl = a + symmetrized(sigma) * p;
      p = symmetrized(p + lyapunov_solve(acl, r));
    }
    const Mat r = detail::care_residual(a, c, sigma, p);
    if (r.norm() > 1e-10 * (1.0 + p.norm() * p.norm()))
      fail(errc::subspace_extraction,
           "algebraic Riccati solution failed residual check");
    return p;
  };

  CareSolutions out;
  out.p_minus = polish(detail::care_subspace_solution(
      es, n, [](std::complex<double> z) { return z.real() < 0.0; }));
  out.p_plus = polish(detail::care_subspace_solution(
      es, n, [](std::complex<double> z) { return z.real() > 0.0; }));
  return out;
}

}  // namespace drekit
