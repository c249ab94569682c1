#ifndef MAGSYM_DECOMPOSITION_HPP
#define MAGSYM_DECOMPOSITION_HPP

#include <array>
#include <cmath>
#include <vector>

#include "magsym/linalg.hpp"
#include "magsym/magnus.hpp"
#include "magsym/problem.hpp"
#include "magsym/types.hpp"

namespace magsym {

// One step of exp(tau * [[0, I], [C, 0]]) factors, for h rho(sqrt(C)) < pi,
// into lower(R) upper(Q) lower(R) with
//   Q(C) = sinh(tau sqrt(C)) / sqrt(C)
//   R(C) = sqrt(C) tanh(tau sqrt(C) / 2).
// QrPair holds the two symmetric payloads, either closed-form or truncated:
// Q to order q+2 in tau, R to order q.
template <typename Scalar>
struct QrPair {
  Matrix<Scalar> q;
  Matrix<Scalar> r;
  bool domain_warning = false;  // tau * sqrt(rho_hat(C)) >= pi
};

namespace detail {

// Gershgorin bound on the spectral radius of a symmetric matrix.
template <typename Scalar>
Scalar gershgorin_radius(const Matrix<Scalar>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Scalar>
bool outside_factoring_domain(const Matrix<Scalar>& c, Scalar tau) {
  using std::abs;
  using std::sqrt;
  return abs(tau) * sqrt(gershgorin_radius(c)) >= pi<Scalar>;
}

}  // namespace detail

// Truncated series for Q and R sharing one power cache, so both come out of
// floor((q-1)/2) products. q must be even and in [6, 12].
template <typename Scalar>
QrPair<Scalar> qr_series(const Matrix<Scalar>& c, Scalar tau, int q,
                         CostLedger& ledger) {
  if (q < 6 || q > 12 || q % 2 != 0)
    throw std::invalid_argument("qr_series: q must be even and in [6, 12]");

  // Q = sum_k tau^{2k+1} C^k / (2k+1)!         (orders 1, 3, ..., q+1)
  // R = sum_k r_k tau^{2k-1} C^k               (orders 1, 3, ..., q-1)
  static constexpr std::array<double, 7> kQCoeff = {
      1.0,          1.0 / 6.0,        1.0 / 120.0,      1.0 / 5040.0,
      1.0 / 362880.0, 1.0 / 39916800.0, 1.0 / 6227020800.0};
  static constexpr std::array<double, 6> kRCoeff = {
      1.0 / 2.0,       -1.0 / 24.0,      1.0 / 240.0,
      -17.0 / 40320.0, 31.0 / 725760.0, -691.0 / 159667200.0};

  const int kmax = q / 2;
  std::vector<Scalar> qc(static_cast<std::size_t>(kmax) + 1);
  std::vector<Scalar> rc(static_cast<std::size_t>(kmax) + 1);
  Scalar tau_odd = tau;  // tau^{2k+1}
  rc[0] = Scalar(0);
  for (int k = 0; k <= kmax; ++k) {
    qc[static_cast<std::size_t>(k)] = Scalar(kQCoeff[static_cast<std::size_t>(k)]) * tau_odd;
    if (k + 1 <= kmax)
      rc[static_cast<std::size_t>(k) + 1] =
          Scalar(kRCoeff[static_cast<std::size_t>(k)]) * tau_odd;
    tau_odd *= tau * tau;
  }

  PowerCache<Scalar> powers(c, &ledger);
  QrPair<Scalar> out;
  out.q = matrix_poly_eval<Scalar>(powers, qc);
  out.r = matrix_poly_eval<Scalar>(powers, rc);
  out.domain_warning = detail::outside_factoring_domain(c, tau);
  return out;
}

// Closed-form Q and R from the eigendecomposition of C, with the analytic
// continuation sin/tan for negative eigenvalues and the lambda = 0 limits
// Q -> tau, R -> 0.
template <typename Scalar>
QrPair<Scalar> qr_exact(const Matrix<Scalar>& c, Scalar tau) {
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tan;
  using std::tanh;

  const auto eig = sym_eigendecomposition(c);
  const Index r = c.rows();
  Vector<Scalar> qf(r), rf(r);
  for (Index i = 0; i < r; ++i) {
    const Scalar lam = eig.values[i];
    if (lam > Scalar(0)) {
      const Scalar w = sqrt(lam);
      qf[i] = sinh(tau * w) / w;
      rf[i] = w * tanh(tau * w / Scalar(2));
    } else if (lam < Scalar(0)) {
      const Scalar w = sqrt(-lam);
      qf[i] = sin(tau * w) / w;
      rf[i] = -w * tan(tau * w / Scalar(2));
    } else {
      qf[i] = tau;
      rf[i] = Scalar(0);
    }
  }
  QrPair<Scalar> out;
  out.q = symmetrized<Scalar>(eig.vectors * qf.asDiagonal() * eig.vectors.transpose());
  out.r = symmetrized<Scalar>(eig.vectors * rf.asDiagonal() * eig.vectors.transpose());
  out.domain_warning = detail::outside_factoring_domain(c, tau);
  return out;
}

// exp(h [[0, I], [C, 0]]) for symmetric C, evaluated eigenvalue-wise:
//   [[cosh(h sqrt(C)), sinh(h sqrt(C))/sqrt(C)],
//    [sqrt(C) sinh(h sqrt(C)), cosh(h sqrt(C))]]
// with cos/sin for negative eigenvalues and the h-limit at lambda = 0.
template <typename Scalar>
Matrix<Scalar> exact_block_exponential(const Matrix<Scalar>& c, Scalar h) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  using std::sqrt;

  const auto eig = sym_eigendecomposition(c);
  const Index r = c.rows();
  Vector<Scalar> fc(r), fq(r), fs(r);
  for (Index i = 0; i < r; ++i) {
    const Scalar lam = eig.values[i];
    if (lam > Scalar(0)) {
      const Scalar w = sqrt(lam);
      fc[i] = cosh(h * w);
      fq[i] = sinh(h * w) / w;
      fs[i] = w * sinh(h * w);
    } else if (lam < Scalar(0)) {
      const Scalar w = sqrt(-lam);
      fc[i] = cos(h * w);
      fq[i] = sin(h * w) / w;
      fs[i] = -w * sin(h * w);
    } else {
      fc[i] = Scalar(1);
      fq[i] = h;
      fs[i] = Scalar(0);
    }
  }
  const Matrix<Scalar>& v = eig.vectors;
  Matrix<Scalar> phi(2 * r, 2 * r);
  phi.topLeftCorner(r, r) = v * fc.asDiagonal() * v.transpose();
  phi.bottomRightCorner(r, r) = phi.topLeftCorner(r, r);
  phi.topRightCorner(r, r) = v * fq.asDiagonal() * v.transpose();
  phi.bottomLeftCorner(r, r) = v * fs.asDiagonal() * v.transpose();
  return phi;
}

// Coefficient matrices of the fourth-order one-exponential scheme.
template <typename Scalar>
struct Coeffs4 {
  Matrix<Scalar> c1, c2, d1;
};

template <typename Scalar>
Coeffs4<Scalar> coeffs4(const Combos<Scalar>& cb, const NodeSamples<Scalar>& s) {
  const Scalar s15 = std::sqrt(Scalar(15));
  Coeffs4<Scalar> c;
  c.c1 = (s15 / Scalar(36)) * cb.k + (Scalar(5) / Scalar(36)) * cb.l;
  c.c2 = -(s15 / Scalar(36)) * cb.k + (Scalar(5) / Scalar(36)) * cb.l;
  c.d1 = -s.m2;
  return c;
}

// Coefficient matrices of the sixth-order two-exponential scheme; requesting
// F charges its one product to the ledger (once per step).
template <typename Scalar>
struct Coeffs6 {
  Matrix<Scalar> c1, c2, d1, d2;
};

template <typename Scalar>
Coeffs6<Scalar> coeffs6(const Combos<Scalar>& cb, const NodeSamples<Scalar>& s,
                        CostLedger& ledger) {
  const Scalar s15 = std::sqrt(Scalar(15));
  const Matrix<Scalar>& f = cb.f(ledger);
  Coeffs6<Scalar> c;
  c.c1 = -(s15 / Scalar(180)) * cb.k + cb.l / Scalar(18) + f / Scalar(12960);
  c.c2 = (s15 / Scalar(180)) * cb.k + cb.l / Scalar(18) + f / Scalar(12960);
  c.d1 = -s.m2 - (Scalar(4) / (Scalar(3) * s15)) * cb.k + cb.l / Scalar(6);
  c.d2 = -s.m2 + (Scalar(4) / (Scalar(3) * s15)) * cb.k + cb.l / Scalar(6);
  return c;
}

// Requested truncation of the decomposition exponentials: a series order q,
// or the closed forms from the eigendecomposition of the D_i.
struct Truncation {
  int q = 6;
  bool exact = false;

  static Truncation series(int q_in) { return {q_in, false}; }
  static Truncation exact_exponential() { return {0, true}; }
};

// Magnus-decomposition stepper for the fundamental matrix.
//
// order 4:  lower(h C1 + R1) upper(Q1) lower(h C2 + R1)        (Q, R at h)
// order 6:  lower(h C2 + R2) upper(Q2) lower(R2 + R1)
//           upper(Q1) lower(h C1 + R1)                         (Q, R at h/2)
// (products act right to left, so the rightmost shear is applied first).
//
// In the fourth-order scheme the C2 payload must ride the first-applied
// shear: expanding the composition exponent, the h^2 Lie bracket is
// (h^2/2)(C_first - C_last) against the exponential generator, which
// matches the -[12]/12 term of the Magnus exponent only for
// C_first - C_last = -(sqrt(15)/18) K. The opposite assignment is still
// time-symmetric but drops to second order.
//
// The trailing lower shear of a step commutes with the leading one of the
// next, so with fusion enabled it is held back and merged into the next
// step's first payload; flush() applies whatever is pending after the last
// step. Each shear applied to the full 2r-by-2r propagator costs two
// products, one per block column.
template <typename Scalar>
class DecompositionStepper {
 public:
  DecompositionStepper(int order, Truncation truncation, bool fuse_steps = true)
      : order_(order), trunc_(truncation), fuse_(fuse_steps) {
    if (order != 4 && order != 6)
      throw std::invalid_argument("DecompositionStepper: order must be 4 or 6");
  }

  void step(Matrix<Scalar>& phi, const LinearProblem<Scalar>& problem, Scalar tn,
            Scalar h, CostLedger& ledger) {
    if (phi.rows() != 2 * problem.dim || phi.cols() != phi.rows())
      throw std::invalid_argument("DecompositionStepper: dimension mismatch");

    const auto samples = sample_nodes(problem, tn, h);
    const auto cb = combos(samples);

    if (order_ == 4) {
      const auto c = coeffs4(cb, samples);
      const auto qr = make_qr(c.d1, h, ledger);
      apply_lower(phi, with_pending(h * c.c2 + qr.r), ledger);
      apply_upper(phi, qr.q, ledger);
      stash_or_apply(phi, h * c.c1 + qr.r, ledger);
    } else {
      const auto c = coeffs6(cb, samples, ledger);
      const Scalar half = h / Scalar(2);
      const auto qr1 = make_qr(c.d1, half, ledger);
      const auto qr2 = make_qr(c.d2, half, ledger);
      apply_lower(phi, with_pending(h * c.c1 + qr1.r), ledger);
      apply_upper(phi, qr1.q, ledger);
      apply_lower(phi, qr1.r + qr2.r, ledger);
      apply_upper(phi, qr2.q, ledger);
      stash_or_apply(phi, h * c.c2 + qr2.r, ledger);
    }
  }

  // Applies the deferred trailing shear, if any. Must be called after the
  // final step before the propagator is read.
  void flush(Matrix<Scalar>& phi, CostLedger& ledger) {
    if (have_pending_) {
      have_pending_ = false;
      apply_lower(phi, pending_, ledger);
    }
  }

  long domain_warnings() const { return domain_warnings_; }
  int order() const { return order_; }
  Truncation truncation() const { return trunc_; }

 private:
  QrPair<Scalar> make_qr(const Matrix<Scalar>& d, Scalar tau, CostLedger& ledger) {
    QrPair<Scalar> qr =
        trunc_.exact ? qr_exact(d, tau) : qr_series(d, tau, trunc_.q, ledger);
    if (qr.domain_warning) ++domain_warnings_;
    return qr;
  }

  Matrix<Scalar> with_pending(Matrix<Scalar> payload) {
    if (have_pending_) {
      payload += pending_;
      have_pending_ = false;
    }
    return payload;
  }

  void stash_or_apply(Matrix<Scalar>& phi, Matrix<Scalar> payload,
                      CostLedger& ledger) {
    if (fuse_) {
      pending_ = std::move(payload);
      have_pending_ = true;
    } else {
      apply_lower(phi, payload, ledger);
    }
  }

  void apply_lower(Matrix<Scalar>& phi, const Matrix<Scalar>& s,
                   CostLedger& ledger) {
    const Index r = phi.rows() / 2;
    phi.bottomRows(r).noalias() += s * phi.topRows(r);
    ledger.matmat += 2;
  }

  void apply_upper(Matrix<Scalar>& phi, const Matrix<Scalar>& q,
                   CostLedger& ledger) {
    const Index r = phi.rows() / 2;
    phi.topRows(r).noalias() += q * phi.bottomRows(r);
    ledger.matmat += 2;
  }

  int order_;
  Truncation trunc_;
  bool fuse_;
  bool have_pending_ = false;
  Matrix<Scalar> pending_;
  long domain_warnings_ = 0;
};

}  // namespace magsym

#endif
