#pragma once

// Dense matrix exponential (scaling and squaring with a degree-13 Pade
// approximant, following Higham 2005) and the Van Loan block-exponential
// construction for integrals of the form  int_0^t exp(s B') W exp(s B) ds.

#include <drekit/types.hpp>

#include <cmath>
#include <cstdint>

namespace drekit {

namespace detail {

// Backward-error thresholds theta_m for the order-(m,m) Pade approximants.
inline constexpr double kTheta3 = 1.495585217958292e-2;
inline constexpr double kTheta5 = 2.539398330063230e-1;
inline constexpr double kTheta7 = 9.504178996162932e-1;
inline constexpr double kTheta9 = 2.097847961257068e0;
inline constexpr double kTheta13 = 5.371920351148152e0;

inline Mat pade_solve(const Mat& u, const Mat& v) {
  // r = (v - u)^{-1} (v + u)
  return (v - u).partialPivLu().solve(v + u);
}

inline Mat expm_pade3(const Mat& a, const Mat& a2) {
  static const double b[] = {120.0, 60.0, 12.0, 1.0};
  const Eigen::Index n = a.rows();
  const Mat u = a * (b[3] * a2 + b[1] * Mat::Identity(n, n));
  const Mat v = b[2] * a2 + b[0] * Mat::Identity(n, n);
  return pade_solve(u, v);
}

inline Mat expm_pade5(const Mat& a, const Mat& a2, const Mat& a4) {
  static const double b[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  const Eigen::Index n = a.rows();
  const Mat u = a * (b[5] * a4 + b[3] * a2 + b[1] * Mat::Identity(n, n));
  const Mat v = b[4] * a4 + b[2] * a2 + b[0] * Mat::Identity(n, n);
  return pade_solve(u, v);
}

inline Mat expm_pade7(const Mat& a, const Mat& a2, const Mat& a4,
                      const Mat& a6) {
  static const double b[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                             25200.0,    1512.0,    56.0,      1.0};
  const Eigen::Index n = a.rows();
  const Mat u =
      a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * Mat::Identity(n, n));
  const Mat v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * Mat::Identity(n, n);
  return pade_solve(u, v);
}

inline Mat expm_pade9(const Mat& a, const Mat& a2, const Mat& a4, const Mat& a6,
                      const Mat& a8) {
  static const double b[] = {17643225600.0, 8821612800.0, 2075673600.0,
                             302702400.0,   30270240.0,   2162160.0,
                             110880.0,      3960.0,       90.0,
                             1.0};
  const Eigen::Index n = a.rows();
  const Mat u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 +
                     b[1] * Mat::Identity(n, n));
  const Mat v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                b[0] * Mat::Identity(n, n);
  return pade_solve(u, v);
}

inline Mat expm_pade13(const Mat& a, const Mat& a2, const Mat& a4,
                       const Mat& a6) {
  static const double b[] = {64764752532480000.0,
                             32382376266240000.0,
                             7771770303897600.0,
                             1187353796428800.0,
                             129060195264000.0,
                             10559470521600.0,
                             670442572800.0,
                             33522128640.0,
                             1323241920.0,
                             40840800.0,
                             960960.0,
                             16380.0,
                             182.0,
                             1.0};
  const Eigen::Index n = a.rows();
  const Mat w1 = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const Mat w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * Mat::Identity(n, n);
  const Mat u = a * (a6 * w1 + w2);
  const Mat z1 = b[12] * a6 + b[10] * a4 + b[8] * a2;
  const Mat v =
      a6 * z1 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * Mat::Identity(n, n);
  return pade_solve(u, v);
}

}  // namespace detail

// exp(A) for a square real matrix. Throws errc::overflow when the result is
// not representable in doubles (entries of the true exponential exceed the
// double range, surfacing as non-finite values after squaring).
inline Mat mat_exp(const Mat& a) {
  require_square(a, "mat_exp argument");
  const Eigen::Index n = a.rows();
  if (n == 0) return Mat(0, 0);
  if (!a.allFinite())
    fail(errc::invalid_argument, "mat_exp argument has non-finite entries");

  const double nrm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm

  Mat r;
  if (nrm <= detail::kTheta13) {
    const Mat a2 = a * a;
    if (nrm <= detail::kTheta3) {
      r = detail::expm_pade3(a, a2);
    } else if (nrm <= detail::kTheta5) {
      const Mat a4 = a2 * a2;
      r = detail::expm_pade5(a, a2, a4);
    } else if (nrm <= detail::kTheta7) {
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      r = detail::expm_pade7(a, a2, a4, a6);
    } else if (nrm <= detail::kTheta9) {
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      const Mat a8 = a6 * a2;
      r = detail::expm_pade9(a, a2, a4, a6, a8);
    } else {
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      r = detail::expm_pade13(a, a2, a4, a6);
    }
  } else {
    int s = static_cast<int>(std::ceil(std::log2(nrm / detail::kTheta13)));
    if (s > 1074)
      fail(errc::overflow, "mat_exp: matrix norm too large to scale");
    const Mat as = a / std::exp2(static_cast<double>(s));
    const Mat a2 = as * as;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    r = detail::expm_pade13(as, a2, a4, a6);
    for (int i = 0; i < s; ++i) {
      r = r * r;
      if (!r.allFinite())
        fail(errc::overflow, "mat_exp: exponential overflows double range");
    }
  }
  if (!r.allFinite())
    fail(errc::overflow, "mat_exp: exponential overflows double range");
  return r;
}

// V(t) = int_0^t exp(s B') W exp(s B) ds, computed from one block exponential
//
//          exp( t * [ -B'  W ]  ) = [ F1  F2 ]
//               (     [  0   B ] )   [ 0   F3 ],   V = F3' F2.
//
// W is symmetrized; the result is symmetrized as well.
inline Mat van_loan_integral(const Mat& b, const Mat& w, double t) {
  require_square(b, "van_loan_integral B");
  require_same_shape(b, w, "van_loan_integral B and W");
  const Eigen::Index n = b.rows();
  Mat block = Mat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -b.transpose();
  block.topRightCorner(n, n) = symmetrized(w);
  block.bottomRightCorner(n, n) = b;
  const Mat e = mat_exp(t * block);
  const Mat f2 = e.topRightCorner(n, n);
  const Mat f3 = e.bottomRightCorner(n, n);
  return symmetrized(f3.transpose() * f2);
}

}  // namespace drekit
