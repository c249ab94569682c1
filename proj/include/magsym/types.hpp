#ifndef MAGSYM_TYPES_HPP
#define MAGSYM_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace magsym {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <typename Scalar>
inline constexpr Scalar pi = std::numbers::pi_v<Scalar>;

// Thrown when an iteration diverges or a convergence ladder runs out of
// halvings; carries enough text to diagnose the run that produced it.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Counters of r-by-r matrix-matrix products (matmat) and matrix-vector
// products (matvec), the two cost currencies of the benchmark suite.
// Scalar-matrix multiplications, linear combinations and evaluations of the
// coefficient matrix M(t) are free. A ledger is owned by one task; merge()
// combines per-task ledgers.
struct CostLedger {
  std::int64_t matmat = 0;
  std::int64_t matvec = 0;

  void merge(const CostLedger& other) {
    matmat += other.matmat;
    matvec += other.matvec;
  }
  void reset() { matmat = matvec = 0; }
};

// State z = (q, p) of the first-order form of x'' + M(t) x = 0.
template <typename Scalar>
struct PhasePoint {
  Vector<Scalar> q;
  Vector<Scalar> p;

  PhasePoint() = default;
  PhasePoint(Vector<Scalar> q_in, Vector<Scalar> p_in)
      : q(std::move(q_in)), p(std::move(p_in)) {
    if (q.size() != p.size())
      throw std::invalid_argument("PhasePoint: q and p dimensions differ");
  }

  Index dim() const { return q.size(); }
};

}  // namespace magsym

#endif
