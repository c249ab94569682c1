#include "doctest.h"

#include <cmath>

#include "magsym/problems.hpp"
#include "magsym/reference.hpp"

using namespace magsym;

TEST_CASE("harmonic oscillator monodromy over one period is -I") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(1.0, 0.0);
  const Matrix<double> phi = reference.fundamental(problem, 0.0, pi<double>);
  CHECK(l1_norm((phi + Matrix<double>::Identity(2, 2)).eval()) <= 1e-10);
}

TEST_CASE("harmonic oscillator quarter rotation") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(1.0, 0.0);
  const Matrix<double> phi = reference.fundamental(problem, 0.0, pi<double> / 2);
  Matrix<double> expected(2, 2);
  expected << 0, 1, -1, 0;
  CHECK(l1_norm((phi - expected).eval()) <= 1e-10);
}

TEST_CASE("monodromy trace of the unforced problem is 2 cos(omega pi)") {
  ReferenceEngine<double> reference;
  for (double omega : {0.7, 2.5}) {
    const auto problem = mathieu_problem(omega, 0.0);
    const Matrix<double> phi = reference.fundamental(problem, 0.0, pi<double>);
    CHECK(phi.trace() ==
          doctest::Approx(2.0 * std::cos(omega * pi<double>)).epsilon(1e-9));
  }
}

TEST_CASE("reference results are cached") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(5.0, 1.0);
  const Matrix<double> first = reference.fundamental(problem, 0.0, pi<double>);
  const Matrix<double> second = reference.fundamental(problem, 0.0, pi<double>);
  CHECK(first == second);  // bitwise: served from the cache
}

TEST_CASE("independent engines agree on the Mathieu monodromy") {
  ReferenceEngine<double> a, b;
  const auto problem = mathieu_problem(5.0, 1.0);
  const Matrix<double> pa = a.fundamental(problem, 0.0, pi<double>);
  const Matrix<double> pb = b.fundamental(problem, 0.0, pi<double>);
  CHECK(l1_norm((pa - pb).eval()) <= 1e-9);
}

TEST_CASE("state reference propagates the harmonic oscillator") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(1.0, 0.0);
  // default state (q, p) = (1, 0) -> (cos t, -sin t)
  const PhasePoint<double> z = reference.state(problem, 0.0, pi<double> / 2);
  CHECK(std::abs(z.q[0]) <= 1e-9);
  CHECK(z.p[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("non-convergence raises a diagnostic error") {
  ReferenceEngine<double>::Options options;
  options.tolerance = 1e-30;
  options.max_halvings = 3;
  options.initial_steps = 4;
  ReferenceEngine<double> reference(options);
  const auto problem = mathieu_problem(1.0, 1.0);
  CHECK_THROWS_WITH_AS(
      (void)reference.fundamental(problem, 0.0, pi<double>),
      doctest::Contains("did not converge"), NumericalError);
}
