#pragma once

// File formats used by the command-line driver.
//
// Problem files are JSON objects:
//
//     {
//       "n": 2,
//       "A":     [row-major n*n numbers],
//       "C":     [row-major n*n numbers],
//       "Sigma": [row-major n*n numbers],
//       "relax_psd": false,            // optional
//       "phi0": {"P": [...], "S": [...], "Q": [...]},   // optional seed
//       "p0":  [row-major n*n numbers] // optional terminal value
//     }
//
// Standalone matrix files are {"n": 2, "data": [row-major numbers]}.
// Solution files mirror the matrix layout and carry run metadata.

#include <drekit/bivariate.hpp>
#include <drekit/problem.hpp>
#include <drekit/types.hpp>

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace drekit {

inline Mat mat_from_flat(const std::vector<double>& flat, Eigen::Index n,
                         const std::string& name) {
  require(static_cast<Eigen::Index>(flat.size()) == n * n,
          errc::dimension_mismatch,
          name + " must have exactly n*n entries");
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = flat[static_cast<size_t>(i * n + j)];
  return m;
}

inline std::vector<double> flat_from_mat(const Mat& m) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::invalid_argument, "cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_argument, path + ": " + e.what());
  }
  return j;
}

inline Mat json_matrix(const nlohmann::json& j, const char* key,
                       Eigen::Index n, const std::string& path) {
  if (!j.contains(key))
    fail(errc::invalid_argument, path + ": missing field \"" + key + "\"");
  std::vector<double> flat;
  try {
    flat = j.at(key).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_argument,
         path + ": field \"" + key + "\" is not a numeric array (" + e.what() +
             ")");
  }
  return mat_from_flat(flat, n, std::string(path) + ": " + key);
}

}  // namespace detail

struct ProblemConfig {
  DreProblem problem;
  std::optional<DualityKernel> phi0;
  std::optional<Mat> p0;
};

inline ProblemConfig load_problem(const std::string& path) {
  const nlohmann::json j = detail::parse_json_file(path);
  if (!j.contains("n") || !j.at("n").is_number_integer())
    fail(errc::invalid_argument, path + ": missing integer field \"n\"");
  const Eigen::Index n = j.at("n").get<Eigen::Index>();
  require(n >= 1, errc::invalid_argument, path + ": n must be >= 1");

  const Mat a = detail::json_matrix(j, "A", n, path);
  const Mat c = detail::json_matrix(j, "C", n, path);
  const Mat sigma = detail::json_matrix(j, "Sigma", n, path);
  const bool relax = j.value("relax_psd", false);

  require(sym_defect(c) <= kSymTol, errc::not_symmetric,
          path + ": C must be symmetric");
  require(sym_defect(sigma) <= kSymTol, errc::not_symmetric,
          path + ": Sigma must be symmetric");

  ProblemConfig cfg{DreProblem::constant(a, c, sigma, relax), std::nullopt,
                    std::nullopt};
  // constant() defers Sigma's semidefiniteness check to the first
  // evaluation; trigger it now so a bad file fails at load time
  (void)cfg.problem.at(0.0);

  if (j.contains("phi0")) {
    const auto& p = j.at("phi0");
    DualityKernel phi;
    phi.P = detail::json_matrix(p, "P", n, path + ": phi0");
    phi.S = detail::json_matrix(p, "S", n, path + ": phi0");
    phi.Q = detail::json_matrix(p, "Q", n, path + ": phi0");
    validate_seed(phi, n);
    cfg.phi0 = phi;
  }
  if (j.contains("p0")) {
    const Mat p0 = detail::json_matrix(j, "p0", n, path);
    require(sym_defect(p0) <= kSymTol, errc::not_symmetric,
            path + ": p0 must be symmetric");
    cfg.p0 = symmetrized(p0);
  }
  return cfg;
}

inline Mat load_matrix(const std::string& path) {
  const nlohmann::json j = detail::parse_json_file(path);
  if (!j.contains("n") || !j.at("n").is_number_integer())
    fail(errc::invalid_argument, path + ": missing integer field \"n\"");
  const Eigen::Index n = j.at("n").get<Eigen::Index>();
  require(n >= 1, errc::invalid_argument, path + ": n must be >= 1");
  return detail::json_matrix(j, "data", n, path);
}

inline nlohmann::json solution_json(const std::string& method, double t1,
                                    double t2, const Mat& p,
                                    const warning_list& warnings) {
  nlohmann::json j;
  j["method"] = method;
  j["t1"] = t1;
  j["t2"] = t2;
  j["n"] = p.rows();
  j["p"] = flat_from_mat(p);
  j["warnings"] = warnings;
  return j;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(errc::invalid_argument, "cannot write file: " + path);
  out << content;
  if (!out) fail(errc::invalid_argument, "write failed: " + path);
}

}  // namespace drekit
