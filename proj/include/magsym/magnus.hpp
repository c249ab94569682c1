#ifndef MAGSYM_MAGNUS_HPP
#define MAGSYM_MAGNUS_HPP

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>

#include "magsym/linalg.hpp"
#include "magsym/problem.hpp"
#include "magsym/types.hpp"

namespace magsym {

// Nodes of the sixth-order Gauss-Legendre quadrature rule on [0,1].
template <typename Scalar>
std::array<Scalar, 3> gl_nodes() {
  const Scalar s15 = std::sqrt(Scalar(15));
  return {(Scalar(5) - s15) / Scalar(10), Scalar(1) / Scalar(2),
          (Scalar(5) + s15) / Scalar(10)};
}

// Weights of the same rule, the column sums of a consistent splitting
// tableau.
template <typename Scalar>
std::array<Scalar, 3> gl_weights() {
  return {Scalar(5) / Scalar(18), Scalar(4) / Scalar(9), Scalar(5) / Scalar(18)};
}

// M sampled at the three Gauss-Legendre nodes of [t_n, t_n + h]. Negative h
// is allowed; the nodes then run backwards, which is what makes the steppers
// time-reversible.
template <typename Scalar>
struct NodeSamples {
  Scalar t = 0;
  Scalar h = 0;
  Matrix<Scalar> m1, m2, m3;

  Index dim() const { return m2.rows(); }
};

template <typename Scalar>
NodeSamples<Scalar> sample_nodes(const LinearProblem<Scalar>& problem, Scalar tn,
                                 Scalar h) {
  if (!problem.has_dense())
    throw std::invalid_argument("sample_nodes: problem '" + problem.label +
                                "' has no dense evaluator");
  const auto c = gl_nodes<Scalar>();
  NodeSamples<Scalar> s;
  s.t = tn;
  s.h = h;
  s.m1 = problem.dense(tn + c[0] * h);
  s.m2 = problem.dense(tn + c[1] * h);
  s.m3 = problem.dense(tn + c[2] * h);
  return s;
}

// K = M1 - M3, L = -M1 + 2 M2 - M3 and, on demand, F = h^2 K^2. Only the
// sixth-order decomposition coefficients need F, so its single product is
// deferred until requested and then memoised.
template <typename Scalar>
class Combos {
 public:
  Matrix<Scalar> k;
  Matrix<Scalar> l;

  Combos(Matrix<Scalar> k_in, Matrix<Scalar> l_in, Scalar h)
      : k(std::move(k_in)), l(std::move(l_in)), h_(h) {}

  const Matrix<Scalar>& f(CostLedger& ledger) const {
    if (!have_f_) {
      f_ = symmetrized<Scalar>((h_ * h_) * (k * k).eval());
      ++ledger.matmat;
      have_f_ = true;
    }
    return f_;
  }

 private:
  Scalar h_;
  mutable Matrix<Scalar> f_;
  mutable bool have_f_ = false;
};

template <typename Scalar>
Combos<Scalar> combos(const NodeSamples<Scalar>& s) {
  return Combos<Scalar>(s.m1 - s.m3, -s.m1 + Scalar(2) * s.m2 - s.m3, s.h);
}

// The interpolation matrices of the sixth-order Magnus truncation, stored
// block-structurally. With A_i = [[0, I], [-M_i, 0]]:
//   alpha_1 = h A_2                    = [[0, drift*I], [x1, 0]]
//   alpha_2 = (sqrt(15) h / 3)(A_3 - A_1)     = [[0, 0], [x2, 0]]
//   alpha_3 = (10 h / 3)(A_3 - 2 A_2 + A_1)   = [[0, 0], [x3, 0]]
// so drift = h, x1 = -h M2, x2 = (sqrt(15) h / 3) K, x3 = (10 h / 3) L.
template <typename Scalar>
struct AlphaMatrices {
  Scalar drift = 0;
  Matrix<Scalar> x1, x2, x3;
};

template <typename Scalar>
AlphaMatrices<Scalar> alphas(const NodeSamples<Scalar>& s) {
  const Scalar h = s.h;
  AlphaMatrices<Scalar> a;
  a.drift = h;
  a.x1 = -h * s.m2;
  a.x2 = (std::sqrt(Scalar(15)) * h / Scalar(3)) * (s.m1 - s.m3);
  a.x3 = (Scalar(10) * h / Scalar(3)) *
         (-s.m1 + Scalar(2) * s.m2 - s.m3);
  return a;
}

// Sixth-order Magnus exponent assembled block-wise from the nested
// commutators of the alpha matrices,
//   Omega = a1 + a3/12 - [12]/12 + [23]/240 + [113]/360 - [212]/240
//         + [1112]/720,
// where [ij..] nests left-to-right. For this block structure [23] vanishes
// identically and the remaining commutators reduce to products of the
// lower-left payloads:
//   [12]   = [[d x2, 0], [0, -d x2]]
//   [113]  = [[0, -2 d^2 x3], [d (x1 x3 + x3 x1), 0]]
//   [212]  = [[0, 0], [2 d x2^2, 0]]
//   [1112] = [[G, 0], [0, -G^T]],  G = d^2 (x1 x2 + 3 x2 x1)
// with d the drift coefficient. The result lies in sp(2r).
template <typename Scalar>
Matrix<Scalar> omega6(const AlphaMatrices<Scalar>& a) {
  const Index r = a.x1.rows();
  const Scalar d = a.drift;
  const Matrix<Scalar> x1x3 = a.x1 * a.x3;
  const Matrix<Scalar> x2sq = a.x2 * a.x2;
  const Matrix<Scalar> x1x2 = a.x1 * a.x2;
  const Matrix<Scalar> x2x1 = a.x2 * a.x1;

  Matrix<Scalar> omega(2 * r, 2 * r);
  const Matrix<Scalar> upper_left =
      -(d / Scalar(12)) * a.x2 +
      (d * d / Scalar(720)) * (x1x2 + Scalar(3) * x2x1);
  omega.topLeftCorner(r, r) = upper_left;
  omega.bottomRightCorner(r, r) = -upper_left.transpose();
  omega.topRightCorner(r, r) =
      d * Matrix<Scalar>::Identity(r, r) - (d * d / Scalar(180)) * a.x3;
  omega.bottomLeftCorner(r, r) =
      a.x1 + a.x3 / Scalar(12) +
      (d / Scalar(360)) * (x1x3 + x1x3.transpose()) -
      (d / Scalar(120)) * x2sq;
  return omega;
}

// exp(Omega^[6]) through a dense high-accuracy matrix exponential; the
// verification oracle for every one-step map in this library. Kept to small
// dimensions on purpose: the oracle must stay cheap enough for sweeps.
template <typename Scalar>
Matrix<Scalar> omega6_oracle(const NodeSamples<Scalar>& s) {
  if (s.dim() > 64)
    throw std::invalid_argument(
        "omega6_oracle: dense 2r-by-2r exponential refused for r > 64");
  return omega6(alphas(s)).exp();
}

}  // namespace magsym

#endif
