#ifndef MAGSYM_LINALG_HPP
#define MAGSYM_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <span>
#include <sstream>
#include <vector>

#include "magsym/types.hpp"

namespace magsym {

// Entrywise L1 norm (sum of absolute values); the error measure used for
// every report in this library. No normalisation by dimension.
template <typename Derived>
typename Derived::Scalar l1_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().sum();
}

// Exact symmetrisation: (a(i,j) + a(j,i))/2 evaluates identically for both
// orders, so the result satisfies entries(i,j) == entries(j,i) bitwise.
template <typename Scalar>
Matrix<Scalar> symmetrized(const Matrix<Scalar>& a) {
  return (a + a.transpose()) / Scalar(2);
}

template <typename Scalar>
bool is_symmetric(const Matrix<Scalar>& a, Scalar tol = Scalar(0)) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

// Fundamental matrix of the 2r-dimensional first-order system, started from
// the identity.
template <typename Scalar>
Matrix<Scalar> fundamental_identity(Index r) {
  return Matrix<Scalar>::Identity(2 * r, 2 * r);
}

// || Phi^T J Phi - J ||_1 with J = [[0, I], [-I, 0]]. Zero for exactly
// symplectic Phi.
template <typename Scalar>
Scalar symplecticity_defect(const Matrix<Scalar>& phi) {
  const Index r = phi.rows() / 2;
  Matrix<Scalar> j = Matrix<Scalar>::Zero(2 * r, 2 * r);
  j.topRightCorner(r, r) = Matrix<Scalar>::Identity(r, r);
  j.bottomLeftCorner(r, r) = -Matrix<Scalar>::Identity(r, r);
  return l1_norm((phi.transpose() * j * phi - j).eval());
}

template <typename Scalar>
struct Eigendecomposition {
  Vector<Scalar> values;   // ascending
  Matrix<Scalar> vectors;  // orthogonal, columns are eigenvectors
};

// Symmetric eigendecomposition C = V diag(lambda) V^T.
template <typename Scalar>
Eigendecomposition<Scalar> sym_eigendecomposition(const Matrix<Scalar>& c) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(c);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sym_eigendecomposition: iteration failed to converge for dim "
        << c.rows();
    throw NumericalError(msg.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Lazily grown cache of powers of a symmetric matrix. power(1) is the base
// and free; each higher power costs one matrix-matrix product, charged to
// the ledger, and is symmetrised so that symmetry is preserved exactly.
template <typename Scalar>
class PowerCache {
 public:
  PowerCache(Matrix<Scalar> base, CostLedger* ledger)
      : ledger_(ledger) {
    powers_.push_back(std::move(base));
  }

  Index dim() const { return powers_.front().rows(); }

  const Matrix<Scalar>& power(int k) {
    while (static_cast<int>(powers_.size()) < k) {
      Matrix<Scalar> next = symmetrized<Scalar>(powers_.back() * powers_.front());
      if (ledger_ != nullptr) ++ledger_->matmat;
      powers_.push_back(std::move(next));
    }
    return powers_[static_cast<std::size_t>(k - 1)];
  }

 private:
  std::vector<Matrix<Scalar>> powers_;
  CostLedger* ledger_;
};

// sum_k coeffs[k] C^k with C^0 = I, sharing powers through the cache.
template <typename Scalar>
Matrix<Scalar> matrix_poly_eval(PowerCache<Scalar>& powers,
                                std::span<const Scalar> coeffs) {
  if (coeffs.empty())
    throw std::invalid_argument("matrix_poly_eval: empty coefficient list");
  const Index r = powers.dim();
  Matrix<Scalar> acc = coeffs[0] * Matrix<Scalar>::Identity(r, r);
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    if (coeffs[k] != Scalar(0)) acc += coeffs[k] * powers.power(static_cast<int>(k));
  }
  return acc;
}

}  // namespace magsym

#endif
