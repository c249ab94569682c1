#ifndef MAGSYM_PROBLEMS_HPP
#define MAGSYM_PROBLEMS_HPP

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "magsym/linalg.hpp"
#include "magsym/problem.hpp"
#include "magsym/types.hpp"

namespace magsym {

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

// Scalar Mathieu equation x'' + (omega^2 + eps cos 2t) x = 0.
template <typename Scalar>
LinearProblem<Scalar> mathieu_problem(Scalar omega, Scalar eps) {
  using std::abs;
  using std::cos;
  LinearProblem<Scalar> p;
  p.dim = 1;
  p.label = "mathieu(omega=" + detail::format_value(static_cast<double>(omega)) +
            ",eps=" + detail::format_value(static_cast<double>(eps)) + ")";
  p.dense = [omega, eps](Scalar t) {
    Matrix<Scalar> m(1, 1);
    m(0, 0) = omega * omega + eps * cos(Scalar(2) * t);
    return m;
  };
  p.spectral_radius_hint = omega * omega + abs(eps);
  return p;
}

// Symmetric Pascal matrix: unit first row and column, then the binomial
// recurrence D(i,j) = D(i-1,j) + D(i,j-1).
template <typename Scalar>
Matrix<Scalar> pascal_matrix(Index r) {
  if (r < 1) throw std::invalid_argument("pascal_matrix: r must be >= 1");
  Matrix<Scalar> d(r, r);
  for (Index i = 0; i < r; ++i) {
    d(i, 0) = Scalar(1);
    d(0, i) = Scalar(1);
  }
  for (Index i = 1; i < r; ++i)
    for (Index j = 1; j < r; ++j) d(i, j) = d(i - 1, j) + d(i, j - 1);
  return d;
}

// Matrix Hill equation x'' + (A + B1 cos 2t + B2 cos 4t) x = 0 with
// A = r^2 I + Pascal(r), B1 = eps I, B2 = (eps/10) I.
template <typename Scalar>
LinearProblem<Scalar> hill_problem(Index r, Scalar eps) {
  using std::abs;
  using std::cos;
  LinearProblem<Scalar> p;
  p.dim = r;
  p.label = "hill(r=" + std::to_string(r) +
            ",eps=" + detail::format_value(static_cast<double>(eps)) + ")";
  auto a = std::make_shared<Matrix<Scalar>>(
      (Scalar(r) * Scalar(r)) * Matrix<Scalar>::Identity(r, r) + pascal_matrix<Scalar>(r));
  p.dense = [a, eps, r](Scalar t) {
    Matrix<Scalar> m = *a;
    const Scalar shift = eps * cos(Scalar(2) * t) + (eps / Scalar(10)) * cos(Scalar(4) * t);
    m.diagonal().array() += shift;
    return m;
  };
  p.spectral_radius_hint =
      a->cwiseAbs().rowwise().sum().maxCoeff() + Scalar(1.1) * abs(eps);
  return p;
}

enum class WaveDiscretization { spectral, central_difference_2 };

inline const char* to_string(WaveDiscretization d) {
  return d == WaveDiscretization::spectral ? "spectral" : "fd2";
}

// Trapped wave equation u_tt = u_xx - (x^2 + g(x,t)) u on [x0, x1] with
// g(x,t) = eps cos(delta t) x^2, treated as periodic (the solution decays to
// machine zero well inside the boundary).
template <typename Scalar>
struct WaveConfig {
  Index n = 128;
  Scalar x0 = Scalar(-10);
  Scalar x1 = Scalar(10);
  Scalar delta = Scalar(1);
  Scalar eps = Scalar(0);
  Scalar sigma = Scalar(1);
  WaveDiscretization disc = WaveDiscretization::spectral;
};

namespace detail {

template <typename Scalar>
struct WaveKernel {
  Vector<Scalar> x;        // grid points x_i = x0 + i dx, i = 0..n-1
  Vector<Scalar> x_sq;
  Scalar dx = 0;
  Scalar length = 0;
  WaveDiscretization disc = WaveDiscretization::spectral;

  // Second derivative: spectral multiplication by -k^2, or the periodic
  // three-point stencil.
  Vector<Scalar> second_derivative(const Vector<Scalar>& v) const {
    const Index n = x.size();
    if (disc == WaveDiscretization::central_difference_2) {
      Vector<Scalar> out(n);
      const Scalar inv = Scalar(1) / (dx * dx);
      for (Index i = 0; i < n; ++i) {
        const Index im = (i == 0) ? n - 1 : i - 1;
        const Index ip = (i == n - 1) ? 0 : i + 1;
        out[i] = (v[im] - Scalar(2) * v[i] + v[ip]) * inv;
      }
      return out;
    }
    Eigen::FFT<Scalar> fft;
    std::vector<Scalar> in(v.data(), v.data() + n);
    std::vector<std::complex<Scalar>> spectrum;
    fft.fwd(spectrum, in);
    const Scalar base = Scalar(2) * pi<Scalar> / length;
    for (Index m = 0; m < n; ++m) {
      const Scalar mode = (m <= n / 2) ? Scalar(m) : Scalar(m) - Scalar(n);
      const Scalar k = base * mode;
      spectrum[static_cast<std::size_t>(m)] *= -k * k;
    }
    std::vector<Scalar> out;
    fft.inv(out, spectrum);
    return Eigen::Map<const Vector<Scalar>>(out.data(), n);
  }
};

}  // namespace detail

// Samples sigma cos(t) exp(-x^2/2) on the grid: the separated solution of
// the g = 0 configuration, used as an analytic oracle.
template <typename Scalar>
Vector<Scalar> wave_analytic_g0(const WaveConfig<Scalar>& config, Scalar t) {
  using std::cos;
  using std::exp;
  const Scalar dx = (config.x1 - config.x0) / Scalar(config.n);
  Vector<Scalar> u(config.n);
  for (Index i = 0; i < config.n; ++i) {
    const Scalar x = config.x0 + Scalar(i) * dx;
    u[i] = config.sigma * cos(t) * exp(-x * x / Scalar(2));
  }
  return u;
}

// Space discretization of the wave equation: M(t) = -D2 + diag(x^2 + g(x,t)).
// Dense, single-application and combined-coefficient evaluators are all
// installed; the combined form applies sum_j w_j M(t_j) in one pass, which is
// what keeps a splitting kick at one matvec.
template <typename Scalar>
LinearProblem<Scalar> wave_problem(const WaveConfig<Scalar>& config) {
  using std::cos;
  const Index n = config.n;
  if (n < 4) throw std::invalid_argument("wave_problem: grid too small");
  if (config.disc == WaveDiscretization::spectral && (n & (n - 1)) != 0)
    throw std::invalid_argument("wave_problem: spectral grid size must be a power of two");

  auto kernel = std::make_shared<detail::WaveKernel<Scalar>>();
  kernel->disc = config.disc;
  kernel->length = config.x1 - config.x0;
  kernel->dx = kernel->length / Scalar(n);
  kernel->x.resize(n);
  for (Index i = 0; i < n; ++i) kernel->x[i] = config.x0 + Scalar(i) * kernel->dx;
  kernel->x_sq = kernel->x.cwiseAbs2();

  const Scalar eps = config.eps;
  const Scalar delta = config.delta;
  const Scalar sigma = config.sigma;

  // diag(x^2 + g(x,t)) = (1 + eps cos(delta t)) x^2
  auto diag_at = [kernel, eps, delta](Scalar t) -> Vector<Scalar> {
    return (Scalar(1) + eps * cos(delta * t)) * kernel->x_sq;
  };

  // Dense -D2, built by applying the operator to unit vectors and
  // symmetrised once so the dense form is exactly symmetric.
  auto minus_d2 = std::make_shared<Matrix<Scalar>>(n, n);
  {
    Vector<Scalar> e = Vector<Scalar>::Zero(n);
    for (Index j = 0; j < n; ++j) {
      e[j] = Scalar(1);
      minus_d2->col(j) = -kernel->second_derivative(e);
      e[j] = Scalar(0);
    }
    *minus_d2 = symmetrized<Scalar>(*minus_d2);
  }

  LinearProblem<Scalar> p;
  p.dim = n;
  p.label = "wave(n=" + std::to_string(n) +
            ",delta=" + detail::format_value(static_cast<double>(delta)) +
            ",eps=" + detail::format_value(static_cast<double>(eps)) + ",disc=" +
            to_string(config.disc) + ")";
  p.dense = [minus_d2, diag_at](Scalar t) {
    Matrix<Scalar> m = *minus_d2;
    m.diagonal() += diag_at(t);
    return m;
  };
  p.apply = [kernel, diag_at](Scalar t, const Vector<Scalar>& v) -> Vector<Scalar> {
    return -kernel->second_derivative(v) + diag_at(t).cwiseProduct(v);
  };
  p.apply_combo = [kernel, diag_at](const std::array<Scalar, 3>& ts,
                                    const std::array<Scalar, 3>& ws,
                                    const Vector<Scalar>& v) -> Vector<Scalar> {
    const Scalar wsum = ws[0] + ws[1] + ws[2];
    Vector<Scalar> diag =
        ws[0] * diag_at(ts[0]) + ws[1] * diag_at(ts[1]) + ws[2] * diag_at(ts[2]);
    return -wsum * kernel->second_derivative(v) + diag.cwiseProduct(v);
  };

  const Scalar k_nyquist = pi<Scalar> * Scalar(n) / kernel->length;
  p.spectral_radius_hint =
      k_nyquist * k_nyquist +
      (Scalar(1) + std::abs(eps)) * kernel->x_sq.maxCoeff();

  p.initial_state = [kernel, sigma]() -> PhasePoint<Scalar> {
    Vector<Scalar> q(kernel->x.size());
    for (Index i = 0; i < kernel->x.size(); ++i)
      q[i] = sigma * std::exp(-kernel->x_sq[i] / Scalar(2));
    return {q, Vector<Scalar>::Zero(kernel->x.size())};
  };
  return p;
}

}  // namespace magsym

#endif
