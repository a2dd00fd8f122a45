#include <drekit/kernel.hpp>
#include <drekit/linalg.hpp>
#include <drekit/transition.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

using namespace drekit;

namespace {

constexpr double kPi = 3.14159265358979323846;

bool throws_code(errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const solver_error& e) {
    return e.code() == expected;
  }
  return false;
}

DreProblem tangent_problem() {
  return DreProblem::constant(Mat::Zero(1, 1), Mat::Identity(1, 1),
                              Mat::Identity(1, 1));
}

// exact tangent-flow kernel over a span delta
MaxPlusKernel tangent_kernel(double delta, double t2 = 0.0) {
  return kernel_from_bivariate(
      psq_from_transition(transition(tangent_problem(), t2 - delta, t2),
                          DualityKernel::identity_seed(1)),
      DualityKernel::identity_seed(1));
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

Mat random_symmetric(Eigen::Index n, std::mt19937_64& eng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(eng);
  return symmetrized(m);
}

Mat random_matrix(Eigen::Index n, std::mt19937_64& eng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(eng);
  return m;
}

}  // namespace

TEST_CASE("tangent-flow kernel blocks are -cot, csc, -cot") {
  const double delta = 0.6;
  const MaxPlusKernel k = tangent_kernel(delta);
  REQUIRE(std::abs(k.I11(0, 0) + 1.0 / std::tan(delta)) < 1e-13);
  REQUIRE(std::abs(k.I12(0, 0) - 1.0 / std::sin(delta)) < 1e-13);
  REQUIRE(std::abs(k.I22(0, 0) + 1.0 / std::tan(delta)) < 1e-13);
  REQUIRE(k.span() == Catch::Approx(delta));
}

TEST_CASE("tangent-flow kernel at span pi/4 is (-1, sqrt 2, -1)") {
  const MaxPlusKernel k = tangent_kernel(kPi / 4.0);
  REQUIRE(std::abs(k.I11(0, 0) + 1.0) < 1e-14);
  REQUIRE(std::abs(k.I12(0, 0) - std::sqrt(2.0)) < 1e-14);
  REQUIRE(std::abs(k.I22(0, 0) + 1.0) < 1e-14);
}

TEST_CASE("transition route builds the kernel across the degenerate bivariate span") {
  // at span pi/2 the bivariate blocks themselves blow up (P = tan(pi/2)), but
  // the kernel is perfectly regular: (0, 1, 0), acting as p -> -1/p
  const MaxPlusKernel k =
      kernel_from_transition(transition(tangent_problem(), -kPi / 2.0, 0.0));
  REQUIRE(std::abs(k.I11(0, 0)) < 1e-15);
  REQUIRE(std::abs(k.I12(0, 0) - 1.0) < 1e-15);
  REQUIRE(std::abs(k.I22(0, 0)) < 1e-15);

  const Mat p = kernel_propagate(k, Mat::Constant(1, 1, 2.0),
                                 gate_policy::algebraic);
  REQUIRE(std::abs(p(0, 0) + 0.5) < 1e-14);
}

TEST_CASE("transition and bivariate routes agree away from degeneracy") {
  const DreProblem prob = benchmark2x2();
  const HamiltonianTransition tr = transition(prob, -0.5, 0.0);
  const MaxPlusKernel from_tr = kernel_from_transition(tr);
  const MaxPlusKernel from_bq = kernel_from_bivariate(
      psq_from_transition(tr, DualityKernel::identity_seed(2)),
      DualityKernel::identity_seed(2));
  REQUIRE(rel_error(from_tr.I11, from_bq.I11) < 1e-11);
  REQUIRE(rel_error(from_tr.I12, from_bq.I12) < 1e-11);
  REQUIRE(rel_error(from_tr.I22, from_bq.I22) < 1e-11);
}

TEST_CASE("kernel is independent of the seed used to build it") {
  const DreProblem prob = benchmark2x2();
  const DualityKernel seed_a = DualityKernel::identity_seed(2);
  const DualityKernel seed_b = benchmark_seed();

  const MaxPlusKernel ka = kernel_from_bivariate(
      rk4_bivariate(prob, seed_a, -0.7, 0.0, 800), seed_a);
  const MaxPlusKernel kb = kernel_from_bivariate(
      rk4_bivariate(prob, seed_b, -0.7, 0.0, 800), seed_b);

  REQUIRE(rel_error(ka.I11, kb.I11) < 1e-9);
  REQUIRE(rel_error(ka.I12, kb.I12) < 1e-9);
  REQUIRE(rel_error(ka.I22, kb.I22) < 1e-9);
}

TEST_CASE("kernels compose as a semigroup over adjacent intervals") {
  const DreProblem prob = benchmark2x2();
  const DualityKernel id = DualityKernel::identity_seed(2);
  auto kernel_over = [&](double t1, double t2) {
    return kernel_from_bivariate(
        psq_from_transition(transition(prob, t1, t2), id), id);
  };
  const MaxPlusKernel left = kernel_over(-0.8, -0.3);
  const MaxPlusKernel right = kernel_over(-0.3, 0.0);
  const MaxPlusKernel direct = kernel_over(-0.8, 0.0);
  const MaxPlusKernel composed = kernel_compose(left, right);

  REQUIRE(composed.t1 == Catch::Approx(-0.8));
  REQUIRE(composed.t2 == 0.0);
  REQUIRE(rel_error(composed.I11, direct.I11) < 1e-11);
  REQUIRE(rel_error(composed.I12, direct.I12) < 1e-11);
  REQUIRE(rel_error(composed.I22, direct.I22) < 1e-11);
}

TEST_CASE("tangent kernels satisfy the angle-addition semigroup") {
  const MaxPlusKernel a = tangent_kernel(0.4, -0.5);  // over [-0.9, -0.5]
  const MaxPlusKernel b = tangent_kernel(0.5, 0.0);   // over [-0.5, 0]
  const MaxPlusKernel direct = tangent_kernel(0.9);
  const MaxPlusKernel composed = kernel_compose(a, b);
  REQUIRE(std::abs(composed.I11(0, 0) - direct.I11(0, 0)) < 1e-13);
  REQUIRE(std::abs(composed.I12(0, 0) - direct.I12(0, 0)) < 1e-13);
  REQUIRE(std::abs(composed.I22(0, 0) - direct.I22(0, 0)) < 1e-13);
}

TEST_CASE("doubling squares the kernel span") {
  const MaxPlusKernel k = tangent_kernel(0.3);
  const MaxPlusKernel doubled = kernel_doubled(k);
  const MaxPlusKernel direct = tangent_kernel(0.6);
  REQUIRE(doubled.span() == Catch::Approx(0.6));
  REQUIRE(std::abs(doubled.I11(0, 0) - direct.I11(0, 0)) < 1e-13);
  REQUIRE(std::abs(doubled.I12(0, 0) - direct.I12(0, 0)) < 1e-13);
  REQUIRE(std::abs(doubled.I22(0, 0) - direct.I22(0, 0)) < 1e-13);
}

TEST_CASE("repeated propagation walks the tangent") {
  const MaxPlusKernel k = tangent_kernel(0.3);
  Mat p = Mat::Zero(1, 1);
  for (int i = 1; i <= 5; ++i) {
    p = kernel_propagate(k, p);
    REQUIRE(std::abs(p(0, 0) - std::tan(0.3 * i)) < 1e-12 * (1.0 + std::abs(p(0, 0))));
  }
}

TEST_CASE("propagation continues algebraically across the escape") {
  // p(0) = 0, span 1.0 twice: p(2) = tan(2) < 0, past the pole at pi/2.
  // After the first step the pivot p + I22 = tan(1) - cot(1) > 0, so strict
  // mode refuses and algebraic mode steps across.
  const MaxPlusKernel k = tangent_kernel(1.0);
  const Mat p1 = kernel_propagate(k, Mat::Zero(1, 1));

  REQUIRE(throws_code(errc::concavity, [&] {
    (void)kernel_propagate(k, p1, gate_policy::strict);
  }));

  warning_list w;
  const Mat p2 = kernel_propagate(k, p1, gate_policy::algebraic, &w);
  REQUIRE(std::abs(p2(0, 0) - std::tan(2.0)) < 1e-12);
  REQUIRE_FALSE(w.empty());
}

TEST_CASE("propagation through the bivariate form matches the kernel route") {
  const DreProblem prob = benchmark2x2();
  const DualityKernel seed = benchmark_seed();
  const BivariateQuadratic bq = rk4_bivariate(prob, seed, -0.7, 0.0, 500);
  const Mat terminal = (Mat(2, 2) << -0.1, 0.0, 0.0, -0.1).finished();

  warning_list w;
  const MaxPlusKernel k =
      kernel_from_bivariate(bq, seed, gate_policy::algebraic, &w);
  const Mat via_kernel =
      kernel_propagate(k, terminal, gate_policy::algebraic, &w);
  const Mat via_psq = propagate_via_psq(bq, seed, terminal, &w);
  REQUIRE(rel_error(via_kernel, via_psq) < 1e-10);
}

TEST_CASE("seed-trajectory collision is handled explicitly") {
  const DreProblem prob = benchmark2x2();
  const DualityKernel seed = benchmark_seed();
  const BivariateQuadratic bq = rk4_bivariate(prob, seed, -0.4, 0.0, 200);

  warning_list w;
  const Mat riding = propagate_via_psq(bq, seed, seed.P, &w);
  REQUIRE(rel_error(riding, bq.P) == 0.0);
  REQUIRE_FALSE(w.empty());

  // a singular but nonzero offset from the seed has no finite propagation
  // through this chart
  Mat grazing = seed.P;
  grazing(0, 0) += 1.0;  // rank-one offset, p - P singular
  REQUIRE(throws_code(errc::seed_collision, [&] {
    (void)propagate_via_psq(bq, seed, grazing);
  }));
}

TEST_CASE("Q spread stays positive definite on random dissipative problems") {
  // 200 random instances with Sigma > 0: over short backward spans the Q
  // block grows monotonically and the kernel construction succeeds in strict
  // mode
  std::mt19937_64 eng(20240817u);
  std::uniform_int_distribution<int> dim(1, 4);
  int built = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = dim(eng);
    const Mat a = random_matrix(n, eng, 0.4);
    const Mat c = random_symmetric(n, eng, 0.4);
    const Mat l = random_matrix(n, eng, 0.5);
    const Mat sigma = symmetrized(l * l.transpose()) +
                      0.2 * Mat::Identity(n, n);
    const DreProblem prob = DreProblem::constant(a, c, sigma);
    const DualityKernel id = DualityKernel::identity_seed(n);

    const BivariateQuadratic half = rk4_bivariate(prob, id, -0.125, 0.0, 20);
    const BivariateQuadratic full = rk4_bivariate(prob, id, -0.25, 0.0, 40);

    REQUIRE(is_positive_definite(Mat(half.Q - id.Q)));
    REQUIRE(is_positive_definite(Mat(full.Q - half.Q)));
    REQUIRE_NOTHROW(kernel_from_bivariate(full, id, gate_policy::strict));
    ++built;
  }
  REQUIRE(built == 200);
}

TEST_CASE("strict mode rejects intervals with indefinite Q spread") {
  // Sigma = -I makes Q decrease backward, so D < 0
  const DreProblem prob = DreProblem::constant(
      Mat::Zero(1, 1), Mat::Identity(1, 1), -Mat::Identity(1, 1),
      /*relax_psd=*/true);
  const DualityKernel id = DualityKernel::identity_seed(1);
  const BivariateQuadratic bq = rk4_bivariate(prob, id, -0.5, 0.0, 50);
  REQUIRE(throws_code(errc::degenerate_interval, [&] {
    (void)kernel_from_bivariate(bq, id, gate_policy::strict);
  }));
  warning_list w;
  REQUIRE_NOTHROW(kernel_from_bivariate(bq, id, gate_policy::algebraic, &w));
  REQUIRE_FALSE(w.empty());
}

TEST_CASE("degenerate flows expose their reachable subspace") {
  // Sigma = diag(1, 0): the second state never couples to the quadratic
  // term, D = diag(tan, 0) has rank one
  Mat sigma = Mat::Zero(2, 2);
  sigma(0, 0) = 1.0;
  const DreProblem prob =
      DreProblem::constant(Mat::Zero(2, 2), Mat::Identity(2, 2), sigma);
  const DualityKernel id = DualityKernel::identity_seed(2);
  const BivariateQuadratic bq =
      psq_from_transition(transition(prob, -0.4, 0.0), id);

  REQUIRE(throws_code(errc::degenerate_interval, [&] {
    (void)kernel_from_bivariate(bq, id, gate_policy::strict);
  }));

  const DegenerateKernel dk = kernel_from_bivariate_pseudo(bq, id);
  REQUIRE(dk.rank == 1);
  REQUIRE(dk.range_basis.cols() == 1);
  // the range is spanned by e1
  REQUIRE(std::abs(std::abs(dk.range_basis(0, 0)) - 1.0) < 1e-12);

  Vec x(2), z(2);
  x << 0.3, 0.0;
  z << 0.0, 0.0;
  REQUIRE(is_reachable(dk, x, z));
  x << 0.0, 0.3;
  REQUIRE_FALSE(is_reachable(dk, x, z));
}

TEST_CASE("fully degenerate flows reach only equal endpoints") {
  // Sigma = 0: linear flow, D = 0, nothing to integrate out
  const DreProblem prob = DreProblem::constant(
      Mat::Zero(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1));
  const DualityKernel id = DualityKernel::identity_seed(1);
  const BivariateQuadratic bq = rk4_bivariate(prob, id, -0.5, 0.0, 50);
  const DegenerateKernel dk = kernel_from_bivariate_pseudo(bq, id);
  REQUIRE(dk.rank == 0);
  Vec x(1), z(1);
  x << 1.0;
  z << 1.0;
  REQUIRE(is_reachable(dk, x, z));
  z << 2.0;
  REQUIRE_FALSE(is_reachable(dk, x, z));
}

TEST_CASE("composition requires adjacent intervals") {
  const MaxPlusKernel a = tangent_kernel(0.3, -0.5);  // over [-0.8, -0.5]
  const MaxPlusKernel b = tangent_kernel(0.3, 0.0);   // over [-0.3, 0]
  REQUIRE(throws_code(errc::non_adjacent,
                      [&] { (void)kernel_compose(a, b); }));
}

TEST_CASE("shifting moves only the time stamps") {
  const MaxPlusKernel k = tangent_kernel(0.4);
  const MaxPlusKernel s = kernel_shifted(k, -1.0);
  REQUIRE(s.t1 == Catch::Approx(-1.4));
  REQUIRE(s.t2 == Catch::Approx(-1.0));
  REQUIRE((s.I11 - k.I11).norm() == 0.0);
  REQUIRE((s.I12 - k.I12).norm() == 0.0);
  REQUIRE((s.I22 - k.I22).norm() == 0.0);
}
