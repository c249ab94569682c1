#ifndef MAGSYM_REFERENCE_HPP
#define MAGSYM_REFERENCE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>
#include <vector>

#include "magsym/magnus.hpp"
#include "magsym/splitting.hpp"
#include "magsym/types.hpp"

namespace magsym {

// Reference propagator: integrate with the highest-order one-step map
// available, halving the step until two consecutive answers agree to the
// tolerance (absolute L1 per entry). Matrix references step with the dense
// exp(Omega^[6]) oracle; state references, which must also work matrix-free,
// step with the 11-stage splitting method. Converged results are cached per
// (problem, t0, t1, tolerance).
template <typename Scalar>
class ReferenceEngine {
 public:
  struct Options {
    Scalar tolerance = Scalar(1e-12);  // per-entry L1
    int max_halvings = 20;
    long initial_steps = 32;
  };

  explicit ReferenceEngine(Options options = Options{}) : options_(options) {}

  Matrix<Scalar> fundamental(const LinearProblem<Scalar>& problem, Scalar t0,
                             Scalar t1) {
    return fundamental(problem, t0, t1, options_.tolerance);
  }

  Matrix<Scalar> fundamental(const LinearProblem<Scalar>& problem, Scalar t0,
                             Scalar t1, Scalar tolerance) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = matrix_cache_.find(key(problem, t0, t1, tolerance));
      if (it != matrix_cache_.end()) return it->second;
    }
    Matrix<Scalar> result = converge(
        [&](long steps) { return propagate_matrix(problem, t0, t1, steps); },
        Scalar(4) * Scalar(problem.dim) * Scalar(problem.dim) * tolerance,
        initial_steps(problem, t0, t1), problem.label);
    std::lock_guard<std::mutex> lock(mutex_);
    matrix_cache_.emplace(key(problem, t0, t1, tolerance), result);
    return result;
  }

  PhasePoint<Scalar> state(const LinearProblem<Scalar>& problem, Scalar t0,
                           Scalar t1) {
    return state(problem, t0, t1, options_.tolerance);
  }

  PhasePoint<Scalar> state(const LinearProblem<Scalar>& problem, Scalar t0,
                           Scalar t1, Scalar tolerance) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = state_cache_.find(key(problem, t0, t1, tolerance));
      if (it != state_cache_.end()) return it->second;
    }
    PhasePoint<Scalar> result = converge(
        [&](long steps) { return propagate_state(problem, t0, t1, steps); },
        Scalar(2) * Scalar(problem.dim) * tolerance,
        initial_steps(problem, t0, t1), problem.label);
    std::lock_guard<std::mutex> lock(mutex_);
    state_cache_.emplace(key(problem, t0, t1, tolerance), result);
    return result;
  }

 private:
  using Key = std::tuple<std::string, Scalar, Scalar, Scalar>;

  static Key key(const LinearProblem<Scalar>& problem, Scalar t0, Scalar t1,
                 Scalar tol) {
    return {problem.label, t0, t1, tol};
  }

  long initial_steps(const LinearProblem<Scalar>& problem, Scalar t0,
                     Scalar t1) const {
    using std::ceil;
    using std::sqrt;
    long n = options_.initial_steps;
    if (problem.spectral_radius_hint) {
      const Scalar scale =
          Scalar(2) * (t1 - t0) * sqrt(std::max(*problem.spectral_radius_hint, Scalar(0)));
      n = std::max(n, static_cast<long>(ceil(scale)));
    }
    return n;
  }

  Matrix<Scalar> propagate_matrix(const LinearProblem<Scalar>& problem, Scalar t0,
                                  Scalar t1, long steps) const {
    const Scalar h = (t1 - t0) / Scalar(steps);
    Matrix<Scalar> phi = fundamental_identity<Scalar>(problem.dim);
    for (long i = 0; i < steps; ++i) {
      const Scalar tn = t0 + Scalar(i) * h;
      phi = omega6_oracle(sample_nodes(problem, tn, h)) * phi;
    }
    return phi;
  }

  PhasePoint<Scalar> propagate_state(const LinearProblem<Scalar>& problem,
                                     Scalar t0, Scalar t1, long steps) const {
    const Scalar h = (t1 - t0) / Scalar(steps);
    PhasePoint<Scalar> z = problem.default_state();
    SplittingStepper<Scalar> stepper(tableau_psi11<Scalar>(),
                                     std::numeric_limits<Scalar>::infinity());
    CostLedger ledger;
    for (long i = 0; i < steps; ++i)
      stepper.step_vector(z, problem, t0 + Scalar(i) * h, h, ledger);
    return z;
  }

  static Scalar distance(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    return l1_norm((a - b).eval());
  }
  static Scalar distance(const PhasePoint<Scalar>& a, const PhasePoint<Scalar>& b) {
    return l1_norm((a.q - b.q).eval()) + l1_norm((a.p - b.p).eval());
  }

  template <typename Propagate>
  auto converge(Propagate&& propagate, Scalar absolute_tolerance, long start_steps,
                const std::string& label) const {
    auto coarse = propagate(start_steps);
    std::vector<std::pair<long, Scalar>> history;
    long steps = start_steps;
    for (int level = 0; level < options_.max_halvings; ++level) {
      steps *= 2;
      auto fine = propagate(steps);
      const Scalar diff = distance(fine, coarse);
      history.emplace_back(steps, diff);
      if (diff < absolute_tolerance) return fine;
      coarse = std::move(fine);
    }
    std::ostringstream msg;
    msg << "reference solution for '" << label << "' did not converge to "
        << absolute_tolerance << " after " << options_.max_halvings
        << " halvings; history:";
    for (const auto& [n, d] : history) msg << " (" << n << ", " << d << ")";
    throw NumericalError(msg.str());
  }

  Options options_;
  std::mutex mutex_;
  std::map<Key, Matrix<Scalar>> matrix_cache_;
  std::map<Key, PhasePoint<Scalar>> state_cache_;
};

}  // namespace magsym

#endif
