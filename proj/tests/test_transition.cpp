#include <drekit/bivariate.hpp>
#include <drekit/linalg.hpp>
#include <drekit/transition.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

using namespace drekit;

namespace {

DreProblem tangent_problem() {
  return DreProblem::constant(Mat::Zero(1, 1), Mat::Identity(1, 1),
                              Mat::Identity(1, 1));
}

// A = 0, C = k^2 I, Sigma = -I: transition blocks are hyperbolic in k
DreProblem relaxation_problem(Eigen::Index n, double k) {
  return DreProblem::constant(Mat::Zero(n, n), k * k * Mat::Identity(n, n),
                              -Mat::Identity(n, n), /*relax_psd=*/true);
}

DreProblem benchmark2x2() {
  Mat a(2, 2), c(2, 2), sigma(2, 2);
  a << -2.0, 1.6, -1.6, -0.4;
  c << 1.5, 0.2, 0.2, -0.4;
  sigma << 0.216, -0.008, -0.008, 0.216;
  return DreProblem::constant(a, c, sigma);
}

DualityKernel benchmark_seed() {
  DualityKernel seed;
  seed.P = (Mat(2, 2) << -1.0, -0.2, -0.2, -0.1).finished();
  seed.S = (Mat(2, 2) << 1.0, 0.2, 0.2, 0.1).finished();
  seed.Q = (Mat(2, 2) << -1.0, -0.2, -0.2, -0.1).finished();
  return seed;
}

}  // namespace

TEST_CASE("transition of the tangent flow is a rotation") {
  const double delta = 0.8;
  const HamiltonianTransition tr = transition(tangent_problem(), -delta, 0.0);
  REQUIRE(tr.n() == 1);
  REQUIRE(std::abs(tr.p11()(0, 0) - std::cos(delta)) < 1e-14);
  REQUIRE(std::abs(tr.p12()(0, 0) + std::sin(delta)) < 1e-14);
  REQUIRE(std::abs(tr.p21()(0, 0) - std::sin(delta)) < 1e-14);
  REQUIRE(std::abs(tr.p22()(0, 0) - std::cos(delta)) < 1e-14);
}

TEST_CASE("transition of the relaxation flow is hyperbolic") {
  const double k = 2.0, delta = 0.6;
  const HamiltonianTransition tr =
      transition(relaxation_problem(2, k), -delta, 0.0);
  const double ch = std::cosh(k * delta);
  const double sh = std::sinh(k * delta);
  REQUIRE((tr.p11() - ch * Mat::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((tr.p12() - (sh / k) * Mat::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((tr.p21() - (k * sh) * Mat::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((tr.p22() - ch * Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("transition matrices are symplectic") {
  REQUIRE(symplectic_defect(transition(benchmark2x2(), -1.5, 0.0)) < 1e-12);
  REQUIRE(symplectic_defect(transition(tangent_problem(), -1.0, 0.0)) < 1e-13);
}

TEST_CASE("stepped integration agrees with the closed form for constant coefficients") {
  const DreProblem prob = benchmark2x2();
  const HamiltonianTransition closed = transition(prob, -0.9, 0.0);
  const HamiltonianTransition stepped = transition(prob, -0.9, 0.0, 400);
  REQUIRE((closed.phi - stepped.phi).norm() < 1e-10);
}

TEST_CASE("transition composes over adjacent intervals") {
  const DreProblem prob = benchmark2x2();
  const Mat full = transition(prob, -1.0, 0.0).phi;
  const Mat left = transition(prob, -1.0, -0.4).phi;
  const Mat right = transition(prob, -0.4, 0.0).phi;
  // state at -1.0 = left * state at -0.4 = left * right * state at 0
  REQUIRE((left * right - full).norm() < 1e-12);
}

TEST_CASE("bivariate blocks from the transition match the tangent closed form") {
  const double delta = 0.4;
  const BivariateQuadratic bq =
      psq_from_transition(transition(tangent_problem(), -delta, 0.0),
                          DualityKernel::identity_seed(1));
  REQUIRE(std::abs(bq.P(0, 0) - std::tan(delta)) < 1e-14);
  REQUIRE(std::abs(bq.S(0, 0) - 1.0 / std::cos(delta)) < 1e-14);
  REQUIRE(std::abs(bq.Q(0, 0) - std::tan(delta)) < 1e-14);
}

TEST_CASE("bivariate blocks from the transition match the relaxation closed form") {
  const double k = 3.0, delta = 0.5;
  const BivariateQuadratic bq =
      psq_from_transition(transition(relaxation_problem(2, k), -delta, 0.0),
                          DualityKernel::identity_seed(2));
  const double th = std::tanh(k * delta);
  REQUIRE((bq.P - k * th * Mat::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((bq.S - (1.0 / std::cosh(k * delta)) * Mat::Identity(2, 2)).norm() <
          1e-12);
  REQUIRE((bq.Q + (th / k) * Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("transition route and stepped bivariate integration agree") {
  const DreProblem prob = benchmark2x2();
  const DualityKernel seed = benchmark_seed();
  const BivariateQuadratic closed =
      psq_from_transition(transition(prob, -0.5, 0.0), seed);
  const BivariateQuadratic stepped = rk4_bivariate(prob, seed, -0.5, 0.0, 2000);
  REQUIRE(rel_error(closed.P, stepped.P) < 1e-10);
  REQUIRE(rel_error(closed.S, stepped.S) < 1e-10);
  REQUIRE(rel_error(closed.Q, stepped.Q) < 1e-10);
}

TEST_CASE("fundamental-solution step reproduces the tangent") {
  const double delta = 1.0;
  const CondReport r =
      davison_maki(tangent_problem(), Mat::Zero(1, 1), -delta, 0.0);
  REQUIRE(std::abs(r.value(0, 0) - std::tan(delta)) < 1e-13);
  REQUIRE_FALSE(r.warned);
}

TEST_CASE("fundamental-solution step matches the relaxation closed form") {
  const double k = 2.0, delta = 0.7;
  const DreProblem prob = relaxation_problem(2, k);
  // terminal value k tanh(k t0) I at backward time continues the same branch:
  // p(t0 + delta on the backward clock) = k tanh(k (t0 + delta)) I
  const double t0 = 0.3;
  const Mat terminal = k * std::tanh(k * t0) * Mat::Identity(2, 2);
  const CondReport r = davison_maki(prob, terminal, -(t0 + delta), -t0);
  const Mat expected = k * std::tanh(k * (t0 + delta)) * Mat::Identity(2, 2);
  REQUIRE(rel_error(r.value, expected) < 1e-12);
}

TEST_CASE("fundamental-solution conditioning collapses near an escape") {
  // two decoupled tangent-like modes with frequencies 1 and 2: at span pi/2
  // the slow mode sits on its escape (U11 = cos(pi/2) ~ 6e-17) while the fast
  // one is regular (U22 = cos(pi) = -1), so the inverted factor is
  // catastrophically ill conditioned
  Mat c = Mat::Zero(2, 2);
  c.diagonal() << 1.0, 4.0;
  const DreProblem prob =
      DreProblem::constant(Mat::Zero(2, 2), c, Mat::Identity(2, 2));

  warning_list w;
  const double pi = 3.14159265358979323846;
  const CondReport at_escape =
      davison_maki(prob, Mat::Zero(2, 2), -pi / 2.0, 0.0, 0, &w);
  REQUIRE(at_escape.rcond < 1e-13);
  REQUIRE(at_escape.warned);
  REQUIRE_FALSE(w.empty());

  const CondReport healthy = davison_maki(prob, Mat::Zero(2, 2), -0.3, 0.0);
  REQUIRE(healthy.rcond > 1e-3);
  REQUIRE_FALSE(healthy.warned);
}
