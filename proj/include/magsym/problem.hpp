#ifndef MAGSYM_PROBLEM_HPP
#define MAGSYM_PROBLEM_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "magsym/types.hpp"

namespace magsym {

// A second-order linear problem x'' + M(t) x = 0 described by its
// time-to-coefficient map. The dense evaluator returns M(t) as a symmetric
// r-by-r matrix. The operator evaluators are optional and serve the
// matrix-free steppers:
//   apply(t, v)            -> M(t) v
//   apply_combo(ts, ws, v) -> (sum_j ws[j] M(ts[j])) v   in a single pass
// spectral_radius_hint bounds rho(M(t)) over the integration window and
// feeds the step-size guardrails; it never costs products.
template <typename Scalar>
struct LinearProblem {
  Index dim = 0;
  std::string label;

  std::function<Matrix<Scalar>(Scalar)> dense;
  std::function<Vector<Scalar>(Scalar, const Vector<Scalar>&)> apply;
  std::function<Vector<Scalar>(const std::array<Scalar, 3>&,
                               const std::array<Scalar, 3>&,
                               const Vector<Scalar>&)>
      apply_combo;
  std::optional<Scalar> spectral_radius_hint;

  // Initial state for vector-mode runs; problems may override (the wave
  // problem installs its initial field here).
  std::function<PhasePoint<Scalar>()> initial_state;

  bool has_dense() const { return static_cast<bool>(dense); }
  bool has_operator() const { return static_cast<bool>(apply); }

  PhasePoint<Scalar> default_state() const {
    if (initial_state) return initial_state();
    return {Vector<Scalar>::Ones(dim), Vector<Scalar>::Zero(dim)};
  }
};

// M(t) v through whichever evaluator the problem provides; one matvec.
template <typename Scalar>
Vector<Scalar> apply_coefficient(const LinearProblem<Scalar>& problem, Scalar t,
                                 const Vector<Scalar>& v, CostLedger& ledger) {
  ++ledger.matvec;
  if (problem.apply) return problem.apply(t, v);
  if (!problem.dense)
    throw std::invalid_argument("LinearProblem '" + problem.label +
                                "' has no evaluator");
  return problem.dense(t) * v;
}

}  // namespace magsym

#endif
