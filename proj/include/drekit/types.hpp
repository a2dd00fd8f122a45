#pragma once

// Core value types shared across the library.
//
// Convention used throughout: the Riccati equation is a terminal-value problem
// in backward time,
//
//     -dp/dt = A(t)' p + p A(t) + C(t) + p Sigma(t) p ,   p(t2) given, t <= t2,
//
// so solvers propagate from a terminal condition at t2 down to t1 < t2.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drekit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kSymTol = 1e-12;
inline constexpr double kCondWarnTol = 1e-13;
inline constexpr double kMinInterval = 1e-10;
inline constexpr double kTimeMatchTol = 1e-9;

// Error taxonomy. `validation` failures reject bad inputs before any
// propagation starts; `propagation` failures occur while solving.
enum class errc {
  invalid_argument,
  dimension_mismatch,
  not_symmetric,
  not_psd,
  empty_interval,
  non_adjacent,
  // propagation-time failures
  singular,
  degenerate_interval,
  invalid_ordering,
  concavity,
  seed_collision,
  assumption_violation,
  no_dichotomy,
  subspace_extraction,
  overflow,
  blowup,
  stiffness_limit,
};

inline bool is_validation_error(errc c) {
  switch (c) {
    case errc::invalid_argument:
    case errc::dimension_mismatch:
    case errc::not_symmetric:
    case errc::not_psd:
    case errc::empty_interval:
    case errc::non_adjacent:
      return true;
    default:
      return false;
  }
}

class solver_error : public std::runtime_error {
 public:
  solver_error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw solver_error(code, what);
}

// Accumulates non-fatal diagnostics. Callers that do not care pass nullptr.
using warning_list = std::vector<std::string>;

inline void warn(warning_list* w, std::string note) {
  if (w) w->push_back(std::move(note));
}

inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double sym_defect(const Mat& m) {
  return (m - m.transpose()).norm() / (1.0 + m.norm());
}

// Square matrix kept symmetric by construction. The wrapper symmetrizes its
// argument; use SymMat::checked when asymmetry should be rejected instead of
// averaged away.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m) : m_(symmetrized(m)) {
    if (m.rows() != m.cols())
      fail(errc::dimension_mismatch, "SymMat requires a square matrix");
  }

  static SymMat checked(const Mat& m, double tol = kSymTol) {
    if (m.rows() != m.cols())
      fail(errc::dimension_mismatch, "SymMat requires a square matrix");
    if (sym_defect(m) > tol)
      fail(errc::not_symmetric, "matrix is not symmetric within tolerance");
    return SymMat(m);
  }

  static SymMat zero(Eigen::Index n) { return SymMat(Mat::Zero(n, n)); }
  static SymMat identity(Eigen::Index n) { return SymMat(Mat::Identity(n, n)); }

  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }
  Eigen::Index n() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Mat m_;
};

// Result of an inversion-like operation together with a 1-norm reciprocal
// condition estimate; `warned` is set when the estimate falls below
// kCondWarnTol and the value should be treated as noise-amplified.
struct CondReport {
  Mat value;
  double rcond = 0.0;
  bool warned = false;
};

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

inline void require_square(const Mat& m, const char* name) {
  if (m.rows() != m.cols())
    fail(errc::dimension_mismatch, std::string(name) + " must be square");
}

inline void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(errc::dimension_mismatch, std::string("dimension mismatch: ") + what);
}

}  // namespace drekit
