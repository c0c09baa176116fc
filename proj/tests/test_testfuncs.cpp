#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wfdiff/testfuncs.hpp"

using namespace wfdiff;

namespace {

std::vector<std::pair<std::vector<int>, double>> quartic_terms_2d() {
  return {{{4, 0}, 1.0},  {{0, 4}, -0.5}, {{2, 1}, 2.0},
          {{1, 2}, -3.0}, {{1, 0}, 0.7},  {{0, 0}, -0.25}};
}

}  // namespace

TEST_CASE("evaluation matches an independent Horner scheme") {
  const auto terms = quartic_terms_2d();
  const Polynomial f = Polynomial::from_terms(2, terms);
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd x = oracle::random_simplex_point(2, gen);
    const double expected =
        oracle::horner_eval(terms, {x[0], x[1]}, 1);
    CHECK(f(x) == doctest::Approx(expected).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("from_terms merges duplicates and drops zero coefficients") {
  const Polynomial f = Polynomial::from_terms(
      2, {{{1, 0}, 2.0}, {{1, 0}, 3.0}, {{0, 1}, 4.0}, {{0, 1}, -4.0}});
  CHECK(f.terms().size() == 1);
  Eigen::VectorXd x(2);
  x << 0.3, 0.5;
  CHECK(f(x) == doctest::Approx(5.0 * 0.3));
}

TEST_CASE("constructor guards") {
  CHECK_THROWS_AS(Polynomial(0), std::invalid_argument);
  CHECK_THROWS_AS(Polynomial::from_terms(2, {{{1}, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Polynomial::from_terms(2, {{{-1, 0}, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Polynomial::from_terms(2, {{{4, 3}, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Polynomial::from_terms(1, {{{7}, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("partial derivatives: linearity, degree drop, commutation") {
  const Polynomial f = Polynomial::from_terms(2, quartic_terms_2d());
  CHECK(f.degree() == 4);
  CHECK(f.partial(0).degree() == 3);

  // Mixed partials commute.
  const Polynomial fxy = f.partial(0).partial(1);
  const Polynomial fyx = f.partial(1).partial(0);
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd x = oracle::random_simplex_point(2, gen);
    CHECK(fxy(x) == doctest::Approx(fyx(x)).epsilon(1e-13).scale(1.0));
  }

  // derivative() by exponent vector equals iterated partials.
  const Polynomial d21 = f.derivative({2, 1});
  const Polynomial iter = f.partial(0).partial(0).partial(1);
  Eigen::VectorXd x(2);
  x << 0.2, 0.3;
  CHECK(d21(x) == doctest::Approx(iter(x)).epsilon(1e-13).scale(1.0));

  // Constants vanish under differentiation.
  CHECK(Polynomial::constant(3, 5.0).partial(1).is_zero());
}

TEST_CASE("gradient and Hessian agree with partials") {
  const Polynomial f = Polynomial::from_terms(2, quartic_terms_2d());
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = oracle::random_simplex_point(2, gen);
    const Eigen::VectorXd g = f.gradient_at(x);
    const Eigen::MatrixXd h = f.hessian_at(x);
    for (int i = 0; i < 2; ++i) {
      CHECK(g[i] == doctest::Approx(f.partial(i)(x)).epsilon(1e-13).scale(1.0));
      for (int j = 0; j < 2; ++j) {
        CHECK(h(i, j) ==
              doctest::Approx(f.partial(i).partial(j)(x)).epsilon(1e-13).scale(1.0));
      }
    }
    CHECK((h - h.transpose()).norm() == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("derivative sup-norms are exact for linear functions") {
  // f = 3 x1 - 2 x2 + 1: |grad| = sqrt(13) everywhere, zero slack.
  const Polynomial f = Polynomial::from_terms(
      2, {{{1, 0}, 3.0}, {{0, 1}, -2.0}, {{0, 0}, 1.0}});
  const auto n1 = f.derivative_norm_sup(1);
  CHECK(n1.value == doctest::Approx(std::sqrt(13.0)).epsilon(1e-14));
  CHECK(n1.slack == 0.0);
  const auto n2 = f.derivative_norm_sup(2);
  CHECK(n2.value == 0.0);
  CHECK(n2.slack == 0.0);
}

TEST_CASE("derivative sup-norms of x^2 on [0,1]") {
  const Polynomial f = Polynomial::from_terms(1, {{{2}, 1.0}});
  const auto n1 = f.derivative_norm_sup(1);  // |2x| maxed at x = 1
  CHECK(n1.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(n1.slack == 0.0);
  const auto n2 = f.derivative_norm_sup(2);  // constant 2
  CHECK(n2.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(n2.slack == 0.0);
  const auto n3 = f.derivative_norm_sup(3);  // above the degree
  CHECK(n3.value == 0.0);
  CHECK(n3.slack == 0.0);
}

TEST_CASE("scalar case supports orders up to six") {
  // f = x^6: f^(6) = 720, f^(5) = 720 x.
  const Polynomial f = Polynomial::from_terms(1, {{{6}, 1.0}});
  CHECK(f.derivative_norm_sup(6).upper() == doctest::Approx(720.0).epsilon(1e-12));
  const auto n5 = f.derivative_norm_sup(5);
  CHECK(n5.upper() >= 720.0 - 1e-9);
  CHECK(n5.value <= 720.0 + 1e-9);
}

TEST_CASE("reported sup-norm upper-bounds the tensor norm at random points") {
  const Polynomial f = Polynomial::from_terms(2, quartic_terms_2d());
  std::mt19937_64 gen(31415);
  for (int m = 1; m <= 4; ++m) {
    const auto bound = f.derivative_norm_sup(m);
    for (int trial = 0; trial < 10000 / (m * m); ++trial) {
      const Eigen::VectorXd x = oracle::random_simplex_point(2, gen);
      // Euclidean norm of the order-m derivative tensor at x.
      double sq = 0.0;
      std::vector<int> orders(2, 0);
      for (int k1 = 0; k1 <= m; ++k1) {
        orders[0] = k1;
        orders[1] = m - k1;
        const double v = f.derivative(orders)(x);
        // Multiplicity of this exponent pattern among ordered m-tuples.
        double mult = 1.0;
        for (int i = 0; i < k1; ++i) mult *= (m - i);
        for (int i = 1; i <= k1; ++i) mult /= i;
        sq += mult * v * v;
      }
      CHECK(std::sqrt(sq) <= bound.upper() + 1e-9);
    }
  }
}

TEST_CASE("gradient norm sup matches direct maximization for a quadratic") {
  // f = x1^2 + x1 x2 on the 2-simplex: grad = (2x1 + x2, x1); |grad|^2 is
  // convex, so the max sits at a vertex: (1,0) gives sqrt(5).
  const Polynomial f =
      Polynomial::from_terms(2, {{{2, 0}, 1.0}, {{1, 1}, 1.0}});
  const auto n1 = f.derivative_norm_sup(1);
  CHECK(n1.value == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
  const auto n2 = f.derivative_norm_sup(2);
  // Hessian is constant [[2,1],[1,0]]; Frobenius norm sqrt(6).
  CHECK(n2.value == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK(n2.slack == 0.0);
}
