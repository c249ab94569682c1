#ifndef MAGSYM_BASELINES_HPP
#define MAGSYM_BASELINES_HPP

#include <array>
#include <cmath>
#include <vector>

#include "magsym/linalg.hpp"
#include "magsym/problem.hpp"
#include "magsym/types.hpp"

namespace magsym {

namespace detail {

// Derivative of the first-order system: A(t) z with A = [[0, I], [-M, 0]].
// One matvec per call in vector form, two products in matrix form.
template <typename Scalar>
PhasePoint<Scalar> system_rhs(const LinearProblem<Scalar>& problem, Scalar t,
                              const PhasePoint<Scalar>& z, CostLedger& ledger) {
  return {z.p, -apply_coefficient(problem, t, z.q, ledger)};
}

template <typename Scalar>
Matrix<Scalar> system_rhs(const Matrix<Scalar>& m_at_t, const Matrix<Scalar>& z,
                          CostLedger& ledger) {
  const Index r = z.rows() / 2;
  Matrix<Scalar> w(z.rows(), z.cols());
  w.topRows(r) = z.bottomRows(r);
  w.bottomRows(r).noalias() = -(m_at_t * z.topRows(r));
  ledger.matmat += 2;
  return w;
}

}  // namespace detail

// Classical four-stage Runge-Kutta on z' = A(t) z; 8 products per step in
// matrix form, 4 matvecs in vector form.
template <typename Scalar>
class Rk4Stepper {
 public:
  void step_vector(PhasePoint<Scalar>& z, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    const Scalar half = h / Scalar(2);
    const auto k1 = detail::system_rhs(problem, tn, z, ledger);
    const auto k2 = detail::system_rhs(
        problem, tn + half, PhasePoint<Scalar>{z.q + half * k1.q, z.p + half * k1.p},
        ledger);
    const auto k3 = detail::system_rhs(
        problem, tn + half, PhasePoint<Scalar>{z.q + half * k2.q, z.p + half * k2.p},
        ledger);
    const auto k4 = detail::system_rhs(
        problem, tn + h, PhasePoint<Scalar>{z.q + h * k3.q, z.p + h * k3.p},
        ledger);
    z.q += (h / Scalar(6)) * (k1.q + Scalar(2) * k2.q + Scalar(2) * k3.q + k4.q);
    z.p += (h / Scalar(6)) * (k1.p + Scalar(2) * k2.p + Scalar(2) * k3.p + k4.p);
  }

  void step_matrix(Matrix<Scalar>& phi, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    if (phi.rows() != 2 * problem.dim)
      throw std::invalid_argument("Rk4Stepper: dimension mismatch");
    const Scalar half = h / Scalar(2);
    const Matrix<Scalar> m0 = problem.dense(tn);
    const Matrix<Scalar> mh = problem.dense(tn + half);
    const Matrix<Scalar> m1 = problem.dense(tn + h);
    const Matrix<Scalar> k1 = detail::system_rhs(m0, phi, ledger);
    const Matrix<Scalar> k2 =
        detail::system_rhs(mh, (phi + half * k1).eval(), ledger);
    const Matrix<Scalar> k3 =
        detail::system_rhs(mh, (phi + half * k2).eval(), ledger);
    const Matrix<Scalar> k4 =
        detail::system_rhs(m1, (phi + h * k3).eval(), ledger);
    phi += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
  }
};

// Butcher data of the s-stage Gauss-Legendre collocation methods (order 2s).
template <typename Scalar>
struct GaussLegendreTableau {
  std::vector<Scalar> c;
  std::vector<std::vector<Scalar>> a;
  std::vector<Scalar> b;
};

template <typename Scalar>
GaussLegendreTableau<Scalar> gauss_legendre_tableau(int stages) {
  using std::sqrt;
  GaussLegendreTableau<Scalar> t;
  if (stages == 2) {
    const Scalar s3 = sqrt(Scalar(3));
    t.c = {Scalar(0.5) - s3 / Scalar(6), Scalar(0.5) + s3 / Scalar(6)};
    t.a = {{Scalar(0.25), Scalar(0.25) - s3 / Scalar(6)},
           {Scalar(0.25) + s3 / Scalar(6), Scalar(0.25)}};
    t.b = {Scalar(0.5), Scalar(0.5)};
  } else if (stages == 3) {
    const Scalar s15 = sqrt(Scalar(15));
    t.c = {Scalar(0.5) - s15 / Scalar(10), Scalar(0.5), Scalar(0.5) + s15 / Scalar(10)};
    t.a = {{Scalar(5) / 36, Scalar(2) / 9 - s15 / 15, Scalar(5) / 36 - s15 / 30},
           {Scalar(5) / 36 + s15 / 24, Scalar(2) / 9, Scalar(5) / 36 - s15 / 24},
           {Scalar(5) / 36 + s15 / 30, Scalar(2) / 9 + s15 / 15, Scalar(5) / 36}};
    t.b = {Scalar(5) / 18, Scalar(4) / 9, Scalar(5) / 18};
  } else {
    throw std::invalid_argument("gauss_legendre_tableau: stages must be 2 or 3");
  }
  return t;
}

// Implicit Gauss-Legendre stepper with the stage equations resolved by a
// fixed number of fixed-point sweeps. The first sweep, started from stage
// states equal to z_n, reproduces the explicit Euler predictor; exactly
// rho * s evaluations of A(t) are spent per step, which is what the cost
// model charges (2 s rho products / s rho matvecs). Sweeps update the stage
// derivatives in place (Gauss-Seidel ordering), which contracts markedly
// faster than a Jacobi sweep at the same evaluation count and is what keeps
// the symplecticity defect of the truncated solve small.
template <typename Scalar>
class GaussLegendreStepper {
 public:
  explicit GaussLegendreStepper(int stages, int iterations = 0)
      : tableau_(gauss_legendre_tableau<Scalar>(stages)),
        iterations_(iterations > 0 ? iterations : (stages == 2 ? 4 : 6)) {
    if (iterations_ < 1)
      throw std::invalid_argument("GaussLegendreStepper: iterations must be >= 1");
  }

  int iterations() const { return iterations_; }
  int stages() const { return static_cast<int>(tableau_.b.size()); }

  void step_vector(PhasePoint<Scalar>& z, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    const int s = stages();
    std::vector<PhasePoint<Scalar>> k(
        static_cast<std::size_t>(s),
        PhasePoint<Scalar>{Vector<Scalar>::Zero(z.dim()), Vector<Scalar>::Zero(z.dim())});
    for (int sweep = 0; sweep < iterations_; ++sweep) {
      for (int i = 0; i < s; ++i) {
        PhasePoint<Scalar> zi = z;
        for (int j = 0; j < s; ++j) {
          const Scalar w = h * tableau_.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          zi.q += w * k[static_cast<std::size_t>(j)].q;
          zi.p += w * k[static_cast<std::size_t>(j)].p;
        }
        k[static_cast<std::size_t>(i)] =
            detail::system_rhs(problem, tn + tableau_.c[static_cast<std::size_t>(i)] * h, zi, ledger);
      }
      check_divergence(k, l1_norm(z.q) + l1_norm(z.p), h);
    }
    for (int i = 0; i < s; ++i) {
      z.q += h * tableau_.b[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)].q;
      z.p += h * tableau_.b[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)].p;
    }
  }

  void step_matrix(Matrix<Scalar>& phi, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    if (phi.rows() != 2 * problem.dim)
      throw std::invalid_argument("GaussLegendreStepper: dimension mismatch");
    const int s = stages();
    std::vector<Matrix<Scalar>> m_nodes;
    m_nodes.reserve(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i)
      m_nodes.push_back(problem.dense(tn + tableau_.c[static_cast<std::size_t>(i)] * h));

    std::vector<Matrix<Scalar>> k(static_cast<std::size_t>(s),
                                  Matrix<Scalar>::Zero(phi.rows(), phi.cols()));
    for (int sweep = 0; sweep < iterations_; ++sweep) {
      for (int i = 0; i < s; ++i) {
        Matrix<Scalar> zi = phi;
        for (int j = 0; j < s; ++j)
          zi += (h * tableau_.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) *
                k[static_cast<std::size_t>(j)];
        k[static_cast<std::size_t>(i)] =
            detail::system_rhs(m_nodes[static_cast<std::size_t>(i)], zi, ledger);
      }
      Scalar max_norm = 0;
      for (const auto& ki : k) max_norm = std::max(max_norm, l1_norm(ki));
      if (max_norm > Scalar(1e6) * (Scalar(1) + l1_norm(phi)))
        throw NumericalError(
            "GaussLegendreStepper: fixed-point iteration diverged; reduce h");
    }
    for (int i = 0; i < s; ++i)
      phi += h * tableau_.b[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)];
  }

 private:
  void check_divergence(const std::vector<PhasePoint<Scalar>>& k, Scalar scale,
                        Scalar h) const {
    Scalar max_norm = 0;
    for (const auto& ki : k)
      max_norm = std::max(max_norm, l1_norm(ki.q) + l1_norm(ki.p));
    if (max_norm > Scalar(1e6) * (Scalar(1) + scale)) {
      std::ostringstream msg;
      msg << "GaussLegendreStepper: fixed-point iteration diverged at h = " << h
          << "; reduce the step size";
      throw NumericalError(msg.str());
    }
  }

  GaussLegendreTableau<Scalar> tableau_;
  int iterations_;
};

}  // namespace magsym

#endif
