#include "doctest.h"

#include <cmath>
#include <random>

#include "magsym/decomposition.hpp"
#include "magsym/problems.hpp"
#include "test_util.hpp"

using namespace magsym;

namespace {

NodeSamples<double> scalar_samples(double m1, double m2, double m3, double h) {
  NodeSamples<double> s;
  s.t = 0;
  s.h = h;
  s.m1 = Matrix<double>::Constant(1, 1, m1);
  s.m2 = Matrix<double>::Constant(1, 1, m2);
  s.m3 = Matrix<double>::Constant(1, 1, m3);
  return s;
}

Matrix<double> lower_shear(const Matrix<double>& s) {
  const Index r = s.rows();
  Matrix<double> m = fundamental_identity<double>(r);
  m.bottomLeftCorner(r, r) = s;
  return m;
}

Matrix<double> upper_shear(const Matrix<double>& q) {
  const Index r = q.rows();
  Matrix<double> m = fundamental_identity<double>(r);
  m.topRightCorner(r, r) = q;
  return m;
}

}  // namespace

TEST_CASE("qr_series of the zero matrix") {
  CostLedger ledger;
  const auto qr = qr_series(Matrix<double>::Zero(3, 3).eval(), 0.7, 6, ledger);
  CHECK(l1_norm((qr.q - 0.7 * Matrix<double>::Identity(3, 3)).eval()) == 0.0);
  CHECK(l1_norm(qr.r) == 0.0);
  CHECK(!qr.domain_warning);
}

TEST_CASE("qr_series scalar case approximates sinh") {
  CostLedger ledger;
  const double h = 0.1;
  const auto qr = qr_series(Matrix<double>::Identity(1, 1).eval(), h, 6, ledger);
  // remainder of the q = 6 truncation starts at h^9/9!
  const double remainder = std::pow(h, 9) / 362880.0;
  CHECK(std::abs(qr.q(0, 0) - std::sinh(h)) <= 1.1 * remainder);
}

TEST_CASE("qr_series with negative eigenvalue tends to sin and tan") {
  const double omega = 1.3;
  const double h = 0.4;
  CostLedger ledger;
  const auto qr =
      qr_series(Matrix<double>::Constant(1, 1, -omega * omega).eval(), h, 12, ledger);
  CHECK(qr.q(0, 0) == doctest::Approx(std::sin(omega * h) / omega).epsilon(1e-10));
  CHECK(qr.r(0, 0) == doctest::Approx(-omega * std::tan(omega * h / 2)).epsilon(1e-9));
}

TEST_CASE("qr_series product count is floor((q-1)/2)") {
  std::mt19937 rng(3);
  const Matrix<double> c = magsym::test::random_symmetric(4, rng);
  for (int q : {6, 8, 10, 12}) {
    CostLedger ledger;
    (void)qr_series(c, 0.2, q, ledger);
    CHECK(ledger.matmat == (q - 1) / 2);
  }
}

TEST_CASE("qr_series rejects invalid truncation orders") {
  CostLedger ledger;
  const Matrix<double> c = Matrix<double>::Identity(2, 2);
  CHECK_THROWS_AS((void)qr_series(c, 0.1, 4, ledger), std::invalid_argument);
  CHECK_THROWS_AS((void)qr_series(c, 0.1, 7, ledger), std::invalid_argument);
  CHECK_THROWS_AS((void)qr_series(c, 0.1, 14, ledger), std::invalid_argument);
}

TEST_CASE("qr_series warns outside the factoring domain") {
  CostLedger ledger;
  const auto qr =
      qr_series(Matrix<double>::Constant(1, 1, -25.0).eval(), 1.0, 6, ledger);
  CHECK(qr.domain_warning);  // h sqrt(rho) = 5 >= pi
}

TEST_CASE("exact factors reproduce the block exponential") {
  std::mt19937 rng(7);
  for (double tau : {0.3, -0.45}) {
    const Matrix<double> d = magsym::test::random_symmetric(4, rng, 2.0);
    const auto qr = qr_exact(d, tau);
    const Matrix<double> product =
        lower_shear(qr.r) * upper_shear(qr.q) * lower_shear(qr.r);
    const Matrix<double> reference = exact_block_exponential(d, tau);
    CHECK(l1_norm((product - reference).eval()) <= 1e-12 * (1.0 + l1_norm(reference)));
  }
}

TEST_CASE("exact_block_exponential of C = 0 is the drift") {
  const Matrix<double> phi = exact_block_exponential(Matrix<double>::Zero(3, 3).eval(), 0.8);
  Matrix<double> expected = fundamental_identity<double>(3);
  expected.topRightCorner(3, 3) = 0.8 * Matrix<double>::Identity(3, 3);
  CHECK(l1_norm((phi - expected).eval()) <= 1e-15);
}

TEST_CASE("exact_block_exponential of C = -I over h = pi is -I") {
  const Matrix<double> phi =
      exact_block_exponential((-Matrix<double>::Identity(2, 2)).eval(), pi<double>);
  CHECK(l1_norm((phi + Matrix<double>::Identity(4, 4)).eval()) <= 1e-14);
}

TEST_CASE("exact_block_exponential of C = I at h = 1 gives hyperbolics") {
  const Matrix<double> phi =
      exact_block_exponential(Matrix<double>::Identity(2, 2).eval(), 1.0);
  CHECK(phi(0, 0) == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
  CHECK(phi(0, 2) == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
  CHECK(phi(2, 0) == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
  CHECK(phi(2, 2) == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
}

TEST_CASE("coeffs4: autonomous collapse") {
  std::mt19937 rng(13);
  const Matrix<double> m = magsym::test::random_symmetric(3, rng);
  NodeSamples<double> s;
  s.t = 0;
  s.h = 0.2;
  s.m1 = s.m2 = s.m3 = m;
  const auto c = coeffs4(combos(s), s);
  CHECK(l1_norm(c.c1) == 0.0);
  CHECK(l1_norm(c.c2) == 0.0);
  CHECK(l1_norm((c.d1 + m).eval()) == 0.0);
}

TEST_CASE("coeffs4: scalar samples (1,2,3)") {
  const auto s = scalar_samples(1, 2, 3, 1.0);
  const auto c = coeffs4(combos(s), s);
  CHECK(c.c1(0, 0) == doctest::Approx(-std::sqrt(15.0) / 18.0).epsilon(1e-15));
  CHECK(c.c2(0, 0) == doctest::Approx(std::sqrt(15.0) / 18.0).epsilon(1e-15));
  CHECK(c.d1(0, 0) == -2.0);
}

TEST_CASE("coeffs4: time reversal swaps C1 and C2") {
  const auto fwd = scalar_samples(1.3, 0.2, -0.7, 0.5);
  const auto bwd = scalar_samples(-0.7, 0.2, 1.3, -0.5);
  const auto cf = coeffs4(combos(fwd), fwd);
  const auto cb = coeffs4(combos(bwd), bwd);
  CHECK(cf.c1(0, 0) == doctest::Approx(cb.c2(0, 0)).epsilon(1e-15));
  CHECK(cf.c2(0, 0) == doctest::Approx(cb.c1(0, 0)).epsilon(1e-15));
}

TEST_CASE("coeffs6: autonomous collapse") {
  std::mt19937 rng(17);
  const Matrix<double> m = magsym::test::random_symmetric(3, rng);
  NodeSamples<double> s;
  s.t = 0;
  s.h = 0.2;
  s.m1 = s.m2 = s.m3 = m;
  CostLedger ledger;
  const auto cb = combos(s);
  const auto c = coeffs6(cb, s, ledger);
  CHECK(l1_norm(c.c1) == 0.0);
  CHECK(l1_norm(c.c2) == 0.0);
  CHECK(l1_norm((c.d1 + m).eval()) == 0.0);
  CHECK(l1_norm((c.d2 + m).eval()) == 0.0);
}

TEST_CASE("coeffs6: scalar samples (1,2,3) at h = 1") {
  const auto s = scalar_samples(1, 2, 3, 1.0);
  CostLedger ledger;
  const auto cb = combos(s);
  const auto c = coeffs6(cb, s, ledger);
  CHECK(c.c1(0, 0) ==
        doctest::Approx(2.0 * std::sqrt(15.0) / 180.0 + 4.0 / 12960.0).epsilon(1e-14));
  // K-terms cancel in D1 + D2
  CHECK(c.d1(0, 0) + c.d2(0, 0) == doctest::Approx(-2.0 * 2.0 + 0.0).epsilon(1e-14));
}

TEST_CASE("coeffs6: D1 + D2 = -2 M2 + L/3 for random samples") {
  std::mt19937 rng(19);
  NodeSamples<double> s;
  s.t = 0;
  s.h = 0.4;
  s.m1 = magsym::test::random_symmetric(4, rng);
  s.m2 = magsym::test::random_symmetric(4, rng);
  s.m3 = magsym::test::random_symmetric(4, rng);
  CostLedger ledger;
  const auto cb = combos(s);
  const auto c = coeffs6(cb, s, ledger);
  const Matrix<double> expected = -2.0 * s.m2 + cb.l / 3.0;
  CHECK(l1_norm((c.d1 + c.d2 - expected).eval()) <= 1e-14);
}

TEST_CASE("one step at h = 1e-8 stays near the identity") {
  const auto problem = mathieu_problem(1.0, 1.0);
  for (int order : {4, 6}) {
    DecompositionStepper<double> stepper(order, Truncation::series(6), false);
    Matrix<double> phi = fundamental_identity<double>(1);
    CostLedger ledger;
    stepper.step(phi, problem, 0.0, 1e-8, ledger);
    CHECK(l1_norm((phi - fundamental_identity<double>(1)).eval()) <= 1e-6);
  }
}

TEST_CASE("EXACT variant is exact on the autonomous oscillator") {
  const double omega = 1.3;
  const double h = 0.3;
  const auto problem = mathieu_problem(omega, 0.0);
  for (int order : {4, 6}) {
    DecompositionStepper<double> stepper(order, Truncation::exact_exponential(), false);
    Matrix<double> phi = fundamental_identity<double>(1);
    CostLedger ledger;
    stepper.step(phi, problem, 0.0, h, ledger);
    Matrix<double> expected(2, 2);
    expected << std::cos(omega * h), std::sin(omega * h) / omega,
        -omega * std::sin(omega * h), std::cos(omega * h);
    CHECK(l1_norm((phi - expected).eval()) <= 1e-12);
  }
}

TEST_CASE("series-vs-exact difference scales like h^(q+1) on autonomous input") {
  std::mt19937 rng(23);
  Matrix<double> m = magsym::test::random_symmetric(2, rng);
  m += 2.0 * Matrix<double>::Identity(2, 2);  // keep the spectrum order one
  auto problem = hill_problem(2, 0.0);
  problem.dense = [m](double) { return m; };

  auto difference = [&](int q, double h) {
    Matrix<double> series_phi = fundamental_identity<double>(2);
    Matrix<double> exact_phi = fundamental_identity<double>(2);
    CostLedger ledger;
    DecompositionStepper<double> series_stepper(4, Truncation::series(q), false);
    DecompositionStepper<double> exact_stepper(4, Truncation::exact_exponential(), false);
    series_stepper.step(series_phi, problem, 0.0, h, ledger);
    exact_stepper.step(exact_phi, problem, 0.0, h, ledger);
    return l1_norm((series_phi - exact_phi).eval());
  };

  for (int q : {6, 8}) {
    const double ratio = difference(q, 0.4) / difference(q, 0.2);
    const double nominal = std::pow(2.0, q + 1);
    CHECK(ratio >= nominal / 1.7);
    CHECK(ratio <= nominal * 1.7);
  }
}

TEST_CASE("one-step defect against the Magnus oracle scales at the local order") {
  const auto problem = mathieu_problem(1.0, 1.0);
  auto defect = [&](int order, double h) {
    DecompositionStepper<double> stepper(order, Truncation::series(12), false);
    Matrix<double> phi = fundamental_identity<double>(1);
    CostLedger ledger;
    stepper.step(phi, problem, 0.0, h, ledger);
    return l1_norm((phi - omega6_oracle(sample_nodes(problem, 0.0, h))).eval());
  };
  // order-4 map vs exp(Omega^[6]): difference O(h^5), halving ratio ~ 32
  const double r4 = defect(4, pi<double> / 40) / defect(4, pi<double> / 80);
  CHECK(r4 >= 20.0);
  CHECK(r4 <= 50.0);
  // order-6 map: difference O(h^7), ratio ~ 128
  const double r6 = defect(6, pi<double> / 40) / defect(6, pi<double> / 80);
  CHECK(r6 >= 90.0);
  CHECK(r6 <= 170.0);
}

TEST_CASE("symplecticity accumulates slowly over many steps") {
  const auto problem = mathieu_problem(1.0, 1.0);
  const long steps = 100;
  const double h = pi<double> / 50;
  for (auto [order, trunc] :
       {std::pair{4, Truncation::series(6)}, std::pair{6, Truncation::series(8)}}) {
    DecompositionStepper<double> stepper(order, trunc);
    Matrix<double> phi = fundamental_identity<double>(1);
    CostLedger ledger;
    for (long i = 0; i < steps; ++i)
      stepper.step(phi, problem, static_cast<double>(i) * h, h, ledger);
    stepper.flush(phi, ledger);
    CHECK(symplecticity_defect(phi) <= 1e-11 * static_cast<double>(steps));
  }
}

TEST_CASE("forward-backward step restores the propagator") {
  const auto problem = mathieu_problem(2.0, 1.0);
  const double h = pi<double> / 20;
  for (auto trunc : {Truncation::series(6), Truncation::series(10),
                     Truncation::exact_exponential()}) {
    for (int order : {4, 6}) {
      DecompositionStepper<double> stepper(order, trunc);
      Matrix<double> phi = fundamental_identity<double>(1);
      CostLedger ledger;
      stepper.step(phi, problem, 0.0, h, ledger);
      stepper.step(phi, problem, h, -h, ledger);
      stepper.flush(phi, ledger);
      CHECK(l1_norm((phi - fundamental_identity<double>(1)).eval()) <= 1e-11);
    }
  }
}

TEST_CASE("cross-step fusion changes the cost but not the result") {
  const auto problem = hill_problem(3, 1.5);
  const double h = pi<double> / 40;
  const long steps = 10;
  for (auto [order, trunc] :
       {std::pair{4, Truncation::series(6)}, std::pair{6, Truncation::series(8)}}) {
    DecompositionStepper<double> fused(order, trunc, true);
    DecompositionStepper<double> plain(order, trunc, false);
    Matrix<double> phi_fused = fundamental_identity<double>(3);
    Matrix<double> phi_plain = fundamental_identity<double>(3);
    CostLedger lf, lp;
    for (long i = 0; i < steps; ++i) {
      fused.step(phi_fused, problem, static_cast<double>(i) * h, h, lf);
      plain.step(phi_plain, problem, static_cast<double>(i) * h, h, lp);
    }
    fused.flush(phi_fused, lf);
    CHECK(l1_norm((phi_fused - phi_plain).eval()) <=
          1e-13 * (1.0 + l1_norm(phi_plain)));
    CHECK(lf.matmat < lp.matmat);
  }
}

TEST_CASE("ledger counts per step match the fused composition") {
  const auto problem = hill_problem(3, 1.0);
  const double h = pi<double> / 30;
  const long steps = 25;
  struct Case {
    int order;
    Truncation trunc;
    long long per_step;
  };
  for (const Case c : {Case{4, Truncation::series(6), 6},
                       Case{4, Truncation::series(8), 7},
                       Case{6, Truncation::series(8), 15},
                       Case{6, Truncation::series(12), 19},
                       Case{4, Truncation::exact_exponential(), 4},
                       Case{6, Truncation::exact_exponential(), 9}}) {
    DecompositionStepper<double> stepper(c.order, c.trunc);
    Matrix<double> phi = fundamental_identity<double>(3);
    CostLedger ledger;
    for (long i = 0; i < steps; ++i)
      stepper.step(phi, problem, static_cast<double>(i) * h, h, ledger);
    stepper.flush(phi, ledger);
    // steady state plus the one closing shear
    CHECK(ledger.matmat == c.per_step * steps + 2);
    CHECK(ledger.matvec == 0);
  }
}

TEST_CASE("stepper counts factoring-domain warnings") {
  const auto problem = mathieu_problem(125.0, 1.0);
  DecompositionStepper<double> stepper(4, Truncation::series(6));
  Matrix<double> phi = fundamental_identity<double>(1);
  CostLedger ledger;
  stepper.step(phi, problem, 0.0, pi<double> / 20, ledger);  // h sqrt(rho) ~ 19.6
  CHECK(stepper.domain_warnings() == 1);
}

TEST_CASE("stepper rejects mismatched dimensions") {
  const auto problem = hill_problem(3, 1.0);
  DecompositionStepper<double> stepper(4, Truncation::series(6));
  Matrix<double> phi = fundamental_identity<double>(2);
  CostLedger ledger;
  CHECK_THROWS_AS(stepper.step(phi, problem, 0.0, 0.1, ledger), std::invalid_argument);
}
