#ifndef MAGSYM_SPLITTING_HPP
#define MAGSYM_SPLITTING_HPP

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "magsym/magnus.hpp"
#include "magsym/problem.hpp"
#include "magsym/types.hpp"

namespace magsym {

// Coefficients of an m-stage drift/kick composition
//   drift(a_{m+1}) kick(C_m) drift(a_m) ... kick(C_1) drift(a_1)
// whose kick matrices are C_i = -(b_{i,1} M_1 + b_{i,2} M_2 + b_{i,3} M_3)
// with M_j sampled at the Gauss-Legendre nodes.
template <typename Scalar>
struct SplittingTableau {
  std::vector<Scalar> a;                    // m+1 drift coefficients
  std::vector<std::array<Scalar, 3>> b;     // m rows of kick weights
  std::array<Scalar, 3> nodes;

  int stages() const { return static_cast<int>(b.size()); }

  // Transcription guards: consistency sums and both mirror symmetries.
  void validate() const {
    using std::abs;
    if (a.size() != b.size() + 1)
      throw std::invalid_argument("SplittingTableau: need m+1 drifts for m kicks");

    Scalar sum_a = 0;
    for (const Scalar ai : a) sum_a += ai;
    if (abs(sum_a - Scalar(1)) > Scalar(1e-13))
      throw std::invalid_argument("SplittingTableau: drift coefficients do not sum to 1");

    const auto w = gl_weights<Scalar>();
    for (int j = 0; j < 3; ++j) {
      Scalar sum_b = 0;
      for (const auto& row : b) sum_b += row[static_cast<std::size_t>(j)];
      if (abs(sum_b - w[static_cast<std::size_t>(j)]) > Scalar(1e-12))
        throw std::invalid_argument(
            "SplittingTableau: kick column sum mismatches quadrature weight");
    }

    const std::size_t m = b.size();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != a[a.size() - 1 - i])
        throw std::invalid_argument("SplittingTableau: drift mirror symmetry broken");
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (b[i][j] != b[m - 1 - i][2 - j])
          throw std::invalid_argument("SplittingTableau: kick mirror symmetry broken");
  }
};

// The optimised 11-stage sixth-order tableau. Only the first six drift
// coefficients and kick rows are stored as data; the rest are generated from
// the mirror rules, which keeps transcription drift impossible.
template <typename Scalar>
SplittingTableau<Scalar> tableau_psi11() {
  static constexpr std::array<double, 6> kA = {
      0.04648745479086313,  -0.06069167116564293, 0.21846652646340681,
      0.16805357948309270,  0.31439236417035348,  -0.18670825374207319};
  static constexpr std::array<std::array<double, 3>, 6> kB = {{
      {0.152309756970167, 0.078927889445323, -0.046907162912825},
      {0.006406269275594, -0.091413523927685, 0.043950351354379},
      {0.086778862327312, 0.051027214890409, -0.004050397550970},
      {0.066634120201024, 0.148499347182669, -0.011368920251338},
      {-0.020231991304321, 0.030206484536889, -0.021734660147529},
      {0.025991549816284, 0.009949620189233, 0.025991549816284},
  }};

  SplittingTableau<Scalar> t;
  t.nodes = gl_nodes<Scalar>();
  t.a.resize(12);
  for (std::size_t i = 0; i < 6; ++i) {
    t.a[i] = Scalar(kA[i]);
    t.a[11 - i] = Scalar(kA[i]);
  }
  t.b.resize(11);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) t.b[i][j] = Scalar(kB[i][j]);
  for (std::size_t i = 6; i < 11; ++i)
    for (std::size_t j = 0; j < 3; ++j) t.b[i][j] = t.b[10 - i][2 - j];
  t.validate();
  return t;
}

// Generic composition engine over explicit kick matrices. One kick on a
// state vector is one matvec; on the full propagator it is two products
// (one per block column). Drifts are scalar shears and free.
template <typename Scalar>
void compose_vector(std::span<const Scalar> drifts,
                    std::span<const Matrix<Scalar>> kicks, PhasePoint<Scalar>& z,
                    Scalar h, CostLedger& ledger) {
  if (drifts.size() != kicks.size() + 1)
    throw std::invalid_argument("compose_vector: need m+1 drifts for m kicks");
  for (std::size_t i = 0; i < kicks.size(); ++i) {
    z.q += (h * drifts[i]) * z.p;
    z.p.noalias() += h * (kicks[i] * z.q);
    ++ledger.matvec;
  }
  z.q += (h * drifts.back()) * z.p;
}

template <typename Scalar>
void compose_matrix(std::span<const Scalar> drifts,
                    std::span<const Matrix<Scalar>> kicks, Matrix<Scalar>& phi,
                    Scalar h, CostLedger& ledger) {
  if (drifts.size() != kicks.size() + 1)
    throw std::invalid_argument("compose_matrix: need m+1 drifts for m kicks");
  const Index r = phi.rows() / 2;
  for (std::size_t i = 0; i < kicks.size(); ++i) {
    phi.topRows(r) += (h * drifts[i]) * phi.bottomRows(r);
    phi.bottomRows(r).noalias() += (h * kicks[i]) * phi.topRows(r);
    ledger.matmat += 2;
  }
  phi.topRows(r) += (h * drifts.back()) * phi.bottomRows(r);
}

// Magnus-splitting stepper. In vector mode the kick is applied through, in
// order of preference: the problem's combined-coefficient evaluator (one
// matvec per kick, the accounting the cost table assumes), dense kick
// matrices (one matvec), or three separate operator applications.
template <typename Scalar>
class SplittingStepper {
 public:
  explicit SplittingStepper(SplittingTableau<Scalar> tableau,
                            Scalar stability_threshold = Scalar(2.5))
      : tableau_(std::move(tableau)), threshold_(stability_threshold) {
    tableau_.validate();
  }

  const SplittingTableau<Scalar>& tableau() const { return tableau_; }

  void step_vector(PhasePoint<Scalar>& z, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    if (z.dim() != problem.dim)
      throw std::invalid_argument("SplittingStepper: dimension mismatch");
    check_guardrail(problem, h);

    const std::array<Scalar, 3> ts = node_times(tn, h);
    if (problem.apply_combo) {
      const std::size_t m = tableau_.b.size();
      for (std::size_t i = 0; i < m; ++i) {
        z.q += (h * tableau_.a[i]) * z.p;
        z.p.noalias() -= h * problem.apply_combo(ts, tableau_.b[i], z.q);
        ++ledger.matvec;
      }
      z.q += (h * tableau_.a.back()) * z.p;
    } else if (problem.has_dense()) {
      const auto kicks = dense_kicks(problem, tn, h);
      compose_vector<Scalar>(tableau_.a, kicks, z, h, ledger);
    } else {
      const std::size_t m = tableau_.b.size();
      for (std::size_t i = 0; i < m; ++i) {
        z.q += (h * tableau_.a[i]) * z.p;
        for (std::size_t j = 0; j < 3; ++j) {
          z.p.noalias() -= (h * tableau_.b[i][j]) * problem.apply(ts[j], z.q);
          ++ledger.matvec;
        }
      }
      z.q += (h * tableau_.a.back()) * z.p;
    }
  }

  void step_matrix(Matrix<Scalar>& phi, const LinearProblem<Scalar>& problem,
                   Scalar tn, Scalar h, CostLedger& ledger) {
    if (phi.rows() != 2 * problem.dim || phi.cols() != phi.rows())
      throw std::invalid_argument("SplittingStepper: dimension mismatch");
    const auto kicks = dense_kicks(problem, tn, h);
    compose_matrix<Scalar>(tableau_.a, kicks, phi, h, ledger);
  }

  long stability_warnings() const { return stability_warnings_; }

 private:
  std::array<Scalar, 3> node_times(Scalar tn, Scalar h) const {
    return {tn + tableau_.nodes[0] * h, tn + tableau_.nodes[1] * h,
            tn + tableau_.nodes[2] * h};
  }

  std::vector<Matrix<Scalar>> dense_kicks(const LinearProblem<Scalar>& problem,
                                          Scalar tn, Scalar h) const {
    const auto s = sample_nodes(problem, tn, h);
    std::vector<Matrix<Scalar>> kicks;
    kicks.reserve(tableau_.b.size());
    for (const auto& row : tableau_.b)
      kicks.push_back(-(row[0] * s.m1 + row[1] * s.m2 + row[2] * s.m3));
    return kicks;
  }

  void check_guardrail(const LinearProblem<Scalar>& problem, Scalar h) {
    using std::abs;
    using std::sqrt;
    if (problem.spectral_radius_hint &&
        abs(h) * sqrt(*problem.spectral_radius_hint) > threshold_)
      ++stability_warnings_;
  }

  SplittingTableau<Scalar> tableau_;
  Scalar threshold_;
  long stability_warnings_ = 0;
};

}  // namespace magsym

#endif
