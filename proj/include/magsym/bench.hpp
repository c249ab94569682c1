#ifndef MAGSYM_BENCH_HPP
#define MAGSYM_BENCH_HPP

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "magsym/baselines.hpp"
#include "magsym/decomposition.hpp"
#include "magsym/problems.hpp"
#include "magsym/reference.hpp"
#include "magsym/splitting.hpp"

namespace magsym {

// ---------------------------------------------------------------------------
// Method identifiers

struct MethodId {
  enum class Kind { upsilon, psi11, rk4, rkgl };

  Kind kind = Kind::upsilon;
  int p = 4;           // decomposition order, or rkgl order (4 -> 2 stages)
  Truncation trunc{};  // decomposition truncation
  int rho = 0;         // rkgl fixed-point sweeps; 0 picks the order default

  bool supports_vector() const { return kind != Kind::upsilon; }
  int rkgl_stages() const { return p == 4 ? 2 : 3; }
  int rkgl_iterations() const { return rho > 0 ? rho : (p == 4 ? 4 : 6); }

  std::string label() const {
    switch (kind) {
      case Kind::psi11:
        return "psi11";
      case Kind::rk4:
        return "rk4";
      case Kind::rkgl: {
        std::string s = "rkgl[" + std::to_string(p);
        if (rho > 0 && rho != (p == 4 ? 4 : 6)) s += ",rho=" + std::to_string(rho);
        return s + "]";
      }
      case Kind::upsilon:
      default:
        return "upsilon[" + std::to_string(p) + "," +
               (trunc.exact ? std::string("exact") : std::to_string(trunc.q)) + "]";
    }
  }
};

// Parses "psi11", "rk4", "rkgl", "rkgl[6]", "upsilon", "upsilon[4,6]",
// "upsilon[6,exact]"; bare names take their parameters from the defaults.
// An empty or "auto" truncation picks q = 6 for order 4 and q = 8 for
// order 6, the smooth-regime defaults.
inline MethodId parse_method(const std::string& text, int default_p,
                             const std::string& default_q, int default_rho) {
  auto parse_trunc = [](const std::string& s, int order) -> Truncation {
    if (s.empty() || s == "auto") return Truncation::series(order == 4 ? 6 : 8);
    if (s == "exact") return Truncation::exact_exponential();
    return Truncation::series(std::stoi(s));
  };

  std::string name = text;
  std::vector<std::string> args;
  const auto bracket = text.find('[');
  if (bracket != std::string::npos) {
    if (text.back() != ']')
      throw std::invalid_argument("bad method spec '" + text + "'");
    name = text.substr(0, bracket);
    std::string inner = text.substr(bracket + 1, text.size() - bracket - 2);
    std::size_t pos = 0;
    while (pos != std::string::npos && !inner.empty()) {
      const auto comma = inner.find(',', pos);
      args.push_back(inner.substr(pos, comma == std::string::npos ? comma : comma - pos));
      pos = (comma == std::string::npos) ? comma : comma + 1;
    }
  }

  MethodId m;
  if (name == "upsilon") {
    m.kind = MethodId::Kind::upsilon;
    m.p = args.empty() ? default_p : std::stoi(args[0]);
    if (m.p != 4 && m.p != 6)
      throw std::invalid_argument("upsilon order must be 4 or 6");
    m.trunc = parse_trunc(args.size() > 1 ? args[1] : default_q, m.p);
  } else if (name == "psi11") {
    m.kind = MethodId::Kind::psi11;
    m.p = 6;
  } else if (name == "rk4") {
    m.kind = MethodId::Kind::rk4;
    m.p = 4;
  } else if (name == "rkgl") {
    m.kind = MethodId::Kind::rkgl;
    m.p = args.empty() ? default_p : std::stoi(args[0]);
    if (m.p != 4 && m.p != 6)
      throw std::invalid_argument("rkgl order must be 4 or 6");
    if (args.size() > 1)
      m.rho = std::stoi(args[1]);
    else if (default_rho > 0)
      m.rho = default_rho;
  } else {
    throw std::invalid_argument("unknown method '" + text + "'");
  }
  return m;
}

// The comparison set used by the sweeps when no methods are requested.
inline std::vector<MethodId> default_method_set() {
  return {
      parse_method("upsilon[4,6]", 4, "6", 0),  parse_method("upsilon[4,8]", 4, "6", 0),
      parse_method("upsilon[6,8]", 6, "8", 0),  parse_method("upsilon[6,12]", 6, "8", 0),
      parse_method("psi11", 6, "8", 0),         parse_method("rk4", 4, "6", 0),
      parse_method("rkgl[4]", 4, "6", 0),       parse_method("rkgl[6]", 6, "8", 0),
  };
}

// Documented per-step cost of the cost table (matrix / vector units). The
// decomposition rows are the published values; the ledger is the normative
// count for our reports and is compared against these in the logs.
struct DocumentedCost {
  double c = 0;
  double v = -1;  // < 0: method not available in vector form
};

inline DocumentedCost table2_cost(const MethodId& m) {
  switch (m.kind) {
    case MethodId::Kind::psi11:
      return {22, 11};
    case MethodId::Kind::rk4:
      return {8, 4};
    case MethodId::Kind::rkgl: {
      const double s = m.rkgl_stages();
      const double rho = m.rkgl_iterations();
      return {2 * s * rho, s * rho};
    }
    case MethodId::Kind::upsilon:
    default:
      if (m.trunc.exact) return {m.p == 4 ? 52.0 / 3.0 : 98.0 / 3.0, -1};
      return {m.p == 4 ? 1.0 + m.trunc.q / 2.0 : 7.0 + m.trunc.q, -1};
  }
}

// Steady-state per-step ledger count of this implementation (excludes the
// one-off flush of the deferred shear at the end of a decomposition run).
inline DocumentedCost measured_cost(const MethodId& m) {
  switch (m.kind) {
    case MethodId::Kind::psi11:
      return {22, 11};
    case MethodId::Kind::rk4:
      return {8, 4};
    case MethodId::Kind::rkgl: {
      const double s = m.rkgl_stages();
      const double rho = m.rkgl_iterations();
      return {2 * s * rho, s * rho};
    }
    case MethodId::Kind::upsilon:
    default:
      if (m.trunc.exact) return {m.p == 4 ? 4.0 : 9.0, -1};
      return {m.p == 4 ? 3.0 + m.trunc.q / 2.0 : 7.0 + m.trunc.q, -1};
  }
}

// ---------------------------------------------------------------------------
// Propagation drivers

template <typename Scalar>
struct FundamentalRun {
  Matrix<Scalar> phi;
  CostLedger ledger;
  long warnings = 0;
};

template <typename Scalar>
FundamentalRun<Scalar> propagate_fundamental(const MethodId& method,
                                             const LinearProblem<Scalar>& problem,
                                             Scalar t0, Scalar t1, long steps) {
  if (steps < 1) throw std::invalid_argument("propagate_fundamental: steps < 1");
  FundamentalRun<Scalar> run{fundamental_identity<Scalar>(problem.dim), {}, 0};
  const Scalar h = (t1 - t0) / Scalar(steps);
  switch (method.kind) {
    case MethodId::Kind::upsilon: {
      DecompositionStepper<Scalar> stepper(method.p, method.trunc);
      for (long i = 0; i < steps; ++i)
        stepper.step(run.phi, problem, t0 + Scalar(i) * h, h, run.ledger);
      stepper.flush(run.phi, run.ledger);
      run.warnings = stepper.domain_warnings();
      break;
    }
    case MethodId::Kind::psi11: {
      SplittingStepper<Scalar> stepper(tableau_psi11<Scalar>());
      for (long i = 0; i < steps; ++i)
        stepper.step_matrix(run.phi, problem, t0 + Scalar(i) * h, h, run.ledger);
      run.warnings = stepper.stability_warnings();
      break;
    }
    case MethodId::Kind::rk4: {
      Rk4Stepper<Scalar> stepper;
      for (long i = 0; i < steps; ++i)
        stepper.step_matrix(run.phi, problem, t0 + Scalar(i) * h, h, run.ledger);
      break;
    }
    case MethodId::Kind::rkgl: {
      GaussLegendreStepper<Scalar> stepper(method.rkgl_stages(), method.rho);
      for (long i = 0; i < steps; ++i)
        stepper.step_matrix(run.phi, problem, t0 + Scalar(i) * h, h, run.ledger);
      break;
    }
  }
  return run;
}

template <typename Scalar>
struct StateRun {
  PhasePoint<Scalar> z;
  CostLedger ledger;
  long warnings = 0;
};

template <typename Scalar>
StateRun<Scalar> propagate_state(const MethodId& method,
                                 const LinearProblem<Scalar>& problem,
                                 PhasePoint<Scalar> z0, Scalar t0, Scalar t1,
                                 long steps) {
  if (steps < 1) throw std::invalid_argument("propagate_state: steps < 1");
  if (!method.supports_vector())
    throw std::invalid_argument("method '" + method.label() +
                                "' has no vector form");
  StateRun<Scalar> run{std::move(z0), {}, 0};
  const Scalar h = (t1 - t0) / Scalar(steps);
  switch (method.kind) {
    case MethodId::Kind::psi11: {
      SplittingStepper<Scalar> stepper(tableau_psi11<Scalar>());
      for (long i = 0; i < steps; ++i)
        stepper.step_vector(run.z, problem, t0 + Scalar(i) * h, h, run.ledger);
      run.warnings = stepper.stability_warnings();
      break;
    }
    case MethodId::Kind::rk4: {
      Rk4Stepper<Scalar> stepper;
      for (long i = 0; i < steps; ++i)
        stepper.step_vector(run.z, problem, t0 + Scalar(i) * h, h, run.ledger);
      break;
    }
    case MethodId::Kind::rkgl: {
      GaussLegendreStepper<Scalar> stepper(method.rkgl_stages(), method.rho);
      for (long i = 0; i < steps; ++i)
        stepper.step_vector(run.z, problem, t0 + Scalar(i) * h, h, run.ledger);
      break;
    }
    case MethodId::Kind::upsilon:
      break;  // unreachable
  }
  return run;
}

// ---------------------------------------------------------------------------
// Result rows and CSV emission

struct ResultRow {
  std::string method;
  double omega = std::numeric_limits<double>::quiet_NaN();  // sweep rows only
  double h = 0;
  long steps = 0;
  long long cost_C = 0;
  long long cost_V = 0;
  double error_L1 = std::numeric_limits<double>::quiet_NaN();
  double defect = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0;
  bool failed = false;
  std::string note;
};

inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

// Scientific notation with 17 significant digits, '.' decimal separator;
// metadata goes into '#'-prefixed comment lines ahead of the header.
inline void write_csv(std::ostream& os, const std::vector<std::string>& metadata,
                      const std::vector<ResultRow>& rows, bool with_omega = false) {
  for (const auto& line : metadata) os << "# " << line << "\n";
  os << "method," << (with_omega ? "omega," : "")
     << "h,steps,cost_C,cost_V,error_L1,defect,wall_ms\n";
  for (const auto& row : rows) {
    os << row.method << ",";
    if (with_omega) os << format_sci(row.omega) << ",";
    os << format_sci(row.h) << "," << row.steps << "," << row.cost_C << ","
       << row.cost_V << "," << format_sci(row.error_L1) << ","
       << format_sci(row.defect) << "," << format_sci(row.wall_ms) << "\n";
    if (row.failed) os << "# failed: method=" << row.method << " " << row.note << "\n";
  }
}

namespace detail {

class WallTimer {
 public:
  explicit WallTimer(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double elapsed_ms() const {
    if (!enabled_) return 0;
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment operations

// Fundamental-matrix run of one (method, step count) cell against the
// reference propagator. Failures are recorded in the row; they never abort
// a sweep.
template <typename Scalar>
ResultRow run_matrix_cell(const MethodId& method, const LinearProblem<Scalar>& problem,
                          Scalar t0, Scalar t1, long steps,
                          ReferenceEngine<Scalar>& reference, bool timing = false) {
  ResultRow row;
  row.method = method.label();
  row.steps = steps;
  row.h = static_cast<double>((t1 - t0) / Scalar(steps));
  try {
    const Matrix<Scalar> ref = reference.fundamental(problem, t0, t1);
    detail::WallTimer timer(timing);
    const auto run = propagate_fundamental(method, problem, t0, t1, steps);
    row.wall_ms = timer.elapsed_ms();
    row.cost_C = run.ledger.matmat;
    row.cost_V = run.ledger.matvec;
    row.error_L1 = static_cast<double>(l1_norm((run.phi - ref).eval()));
    row.defect = static_cast<double>(symplecticity_defect(run.phi));
    if (run.warnings > 0)
      row.note = "domain warnings: " + std::to_string(run.warnings);
  } catch (const std::exception& e) {
    row.failed = true;
    row.note = e.what();
  }
  return row;
}

template <typename Scalar>
ResultRow run_vector_cell(const MethodId& method, const LinearProblem<Scalar>& problem,
                          Scalar t0, Scalar t1, long steps,
                          ReferenceEngine<Scalar>& reference, bool timing = false) {
  ResultRow row;
  row.method = method.label();
  row.steps = steps;
  row.h = static_cast<double>((t1 - t0) / Scalar(steps));
  try {
    const PhasePoint<Scalar> ref = reference.state(problem, t0, t1);
    detail::WallTimer timer(timing);
    auto run = propagate_state(method, problem, problem.default_state(), t0, t1, steps);
    row.wall_ms = timer.elapsed_ms();
    row.cost_C = run.ledger.matmat;
    row.cost_V = run.ledger.matvec;
    row.error_L1 = static_cast<double>(l1_norm((run.z.q - ref.q).eval()) +
                                       l1_norm((run.z.p - ref.p).eval()));
    if (run.warnings > 0)
      row.note = "stability warnings: " + std::to_string(run.warnings);
  } catch (const std::exception& e) {
    row.failed = true;
    row.note = e.what();
  }
  return row;
}

template <typename Scalar>
std::vector<ResultRow> run_fundamental(const std::vector<MethodId>& methods,
                                       const LinearProblem<Scalar>& problem,
                                       Scalar t0, Scalar t1,
                                       const std::vector<long>& step_counts,
                                       ReferenceEngine<Scalar>& reference,
                                       bool timing = false) {
  std::vector<ResultRow> rows;
  for (const auto& m : methods)
    for (long steps : step_counts)
      rows.push_back(run_matrix_cell(m, problem, t0, t1, steps, reference, timing));
  return rows;
}

template <typename Scalar>
std::vector<ResultRow> run_vector(const std::vector<MethodId>& methods,
                                  const LinearProblem<Scalar>& problem, Scalar t0,
                                  Scalar t1, const std::vector<long>& step_counts,
                                  ReferenceEngine<Scalar>& reference,
                                  bool timing = false) {
  std::vector<ResultRow> rows;
  for (const auto& m : methods)
    for (long steps : step_counts)
      rows.push_back(run_vector_cell(m, problem, t0, t1, steps, reference, timing));
  return rows;
}

// Mathieu monodromy error at fixed step size over a frequency grid.
template <typename Scalar>
std::vector<ResultRow> error_vs_omega(const std::vector<MethodId>& methods,
                                      Scalar eps, Scalar h,
                                      const std::vector<Scalar>& omegas,
                                      ReferenceEngine<Scalar>& reference,
                                      bool timing = false) {
  const Scalar t1 = pi<Scalar>;
  const long steps = std::max<long>(1, std::lround(static_cast<double>(t1 / h)));
  std::vector<ResultRow> rows;
  for (const Scalar omega : omegas) {
    const auto problem = mathieu_problem(omega, eps);
    for (const auto& m : methods) {
      ResultRow row = run_matrix_cell(m, problem, Scalar(0), t1, steps, reference, timing);
      row.omega = static_cast<double>(omega);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Best-truncation ranking on the Mathieu monodromy runs. Each q runs with a
// step count chosen so that all candidates in a cell spend (approximately)
// the same product budget; candidates are then ranked by error. The ranking
// criterion is recorded in the emitted metadata since the original table
// does not pin one down.
struct BestQRow {
  int family_p = 4;
  double eps = 0;
  double omega = 0;
  int q = 6;
  double h = 0;
  long steps = 0;
  long long cost_C = 0;
  double error_L1 = std::numeric_limits<double>::quiet_NaN();
  int rank = 0;
};

struct BestQTable {
  std::vector<BestQRow> rows;
  std::vector<std::string> summary;  // one line per (eps, family): top-2 per omega
};

template <typename Scalar>
BestQTable best_q_table(const std::vector<Scalar>& eps_set,
                        const std::vector<Scalar>& omega_set,
                        const std::vector<int>& q_set,
                        ReferenceEngine<Scalar>& reference,
                        long base_steps_per_unit_omega = 20) {
  for (int q : q_set)
    if (q != 6 && q != 8 && q != 10 && q != 12)
      throw std::invalid_argument("best_q_table: q set must be within {6,8,10,12}");

  BestQTable table;
  const Scalar t1 = pi<Scalar>;
  for (const Scalar eps : eps_set) {
    for (int family : {4, 6}) {
      std::string summary = "eps=" + detail::format_value(static_cast<double>(eps)) +
                            " family=upsilon[" + std::to_string(family) + ",q]:";
      for (const Scalar omega : omega_set) {
        const auto problem = mathieu_problem(omega, eps);
        const double unit_cost_q6 =
            measured_cost(parse_method("upsilon[" + std::to_string(family) + ",6]", 4, "6", 0)).c;
        const double omega_scale = std::max(1.0, static_cast<double>(omega));
        const double budget =
            static_cast<double>(base_steps_per_unit_omega) * omega_scale * unit_cost_q6;

        std::vector<BestQRow> cell;
        for (int q : q_set) {
          MethodId m = parse_method(
              "upsilon[" + std::to_string(family) + "," + std::to_string(q) + "]", 4, "6", 0);
          const long steps =
              std::max<long>(4, std::llround(budget / measured_cost(m).c));
          BestQRow row;
          row.family_p = family;
          row.eps = static_cast<double>(eps);
          row.omega = static_cast<double>(omega);
          row.q = q;
          row.steps = steps;
          row.h = static_cast<double>(t1 / Scalar(steps));
          const ResultRow cell_row =
              run_matrix_cell(m, problem, Scalar(0), t1, steps, reference);
          row.cost_C = cell_row.cost_C;
          row.error_L1 = cell_row.error_L1;
          cell.push_back(row);
        }
        std::stable_sort(cell.begin(), cell.end(), [](const BestQRow& a, const BestQRow& b) {
          const bool a_ok = std::isfinite(a.error_L1);
          const bool b_ok = std::isfinite(b.error_L1);
          if (a_ok != b_ok) return a_ok;
          return a.error_L1 < b.error_L1;
        });
        std::string top = " omega=" + detail::format_value(static_cast<double>(omega)) + "->(";
        for (std::size_t i = 0; i < cell.size(); ++i) {
          cell[i].rank = static_cast<int>(i) + 1;
          if (i < 2) top += (i ? "," : "") + std::to_string(cell[i].q);
        }
        summary += top + ")";
        std::stable_sort(cell.begin(), cell.end(),
                         [](const BestQRow& a, const BestQRow& b) { return a.q < b.q; });
        for (auto& row : cell) table.rows.push_back(row);
      }
      table.summary.push_back(summary);
    }
  }
  return table;
}

inline void write_best_q_csv(std::ostream& os, const std::vector<std::string>& metadata,
                             const BestQTable& table) {
  for (const auto& line : metadata) os << "# " << line << "\n";
  os << "family,eps,omega,q,h,steps,cost_C,error_L1,rank\n";
  for (const auto& r : table.rows) {
    os << r.family_p << "," << format_sci(r.eps) << "," << format_sci(r.omega) << ","
       << r.q << "," << format_sci(r.h) << "," << r.steps << "," << r.cost_C << ","
       << format_sci(r.error_L1) << "," << r.rank << "\n";
  }
  for (const auto& line : table.summary) os << "# " << line << "\n";
}

// ---------------------------------------------------------------------------
// Monodromy stability analysis

template <typename Scalar>
struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;
  double max_abs = 0;
  double pairing_defect = 0;  // max_i min_j |lambda_i lambda_j - 1|
  bool stable = false;
  Matrix<Scalar> monodromy;
};

template <typename Scalar>
StabilityReport<Scalar> stability_analysis(const MethodId& method,
                                           const LinearProblem<Scalar>& problem,
                                           Scalar period, long steps) {
  StabilityReport<Scalar> report;
  const auto run = propagate_fundamental(method, problem, Scalar(0), period, steps);
  report.monodromy = run.phi;

  Eigen::EigenSolver<Matrix<Scalar>> solver(run.phi);
  if (solver.info() != Eigen::Success)
    throw NumericalError("stability_analysis: eigenvalue iteration failed");
  const auto& values = solver.eigenvalues();
  for (Index i = 0; i < values.size(); ++i)
    report.eigenvalues.emplace_back(static_cast<double>(values[i].real()),
                                    static_cast<double>(values[i].imag()));

  for (const auto& lam : report.eigenvalues) {
    report.max_abs = std::max(report.max_abs, std::abs(lam));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : report.eigenvalues)
      best = std::min(best, std::abs(lam * mu - 1.0));
    report.pairing_defect = std::max(report.pairing_defect, best);
  }
  report.stable = report.max_abs <= 1.0 + 1e-8;
  return report;
}

// ---------------------------------------------------------------------------
// Convergence-order estimation

struct ConvergenceReport {
  std::vector<ResultRow> rows;
  std::optional<double> slope;  // undefined when every point sits at the floor
};

// Least-squares slope of log(error) against log(h), skipping points at the
// roundoff floor (error < 1e-12).
inline std::optional<double> fit_order(const std::vector<ResultRow>& rows,
                                       double floor = 1e-12) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (!r.failed && std::isfinite(r.error_L1) && r.error_L1 >= floor)
      pts.emplace_back(std::log(r.h), std::log(r.error_L1));
  if (pts.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

enum class RunMode { matrix, vector_mode };

template <typename Scalar>
ConvergenceReport convergence_order(const MethodId& method,
                                    const LinearProblem<Scalar>& problem, Scalar t0,
                                    Scalar t1, const std::vector<long>& step_counts,
                                    ReferenceEngine<Scalar>& reference,
                                    RunMode mode = RunMode::matrix) {
  ConvergenceReport report;
  for (long steps : step_counts)
    report.rows.push_back(mode == RunMode::matrix
                              ? run_matrix_cell(method, problem, t0, t1, steps, reference)
                              : run_vector_cell(method, problem, t0, t1, steps, reference));
  report.slope = fit_order(report.rows);
  return report;
}

}  // namespace magsym

#endif
