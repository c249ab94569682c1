// Benchmark harness for the Magnus-based symplectic integrators: reproduces
// the error-vs-cost experiments on the Mathieu, matrix-Hill and trapped-wave
// problems and emits CSV.

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "magsym/magsym.hpp"

namespace {

using namespace magsym;

constexpr double kPi = pi<double>;

struct CommonOptions {
  std::vector<std::string> methods;
  int p = 4;
  std::string q;  // "", "6".."12" or "exact"; empty resolves per order
  int rho = 0;
  std::vector<double> hs;
  std::vector<long> steps;
  double t1 = -1;  // < 0: subcommand default
  std::string mode = "matrix";
  std::string out;
  bool timing = false;
  double ref_tol = 1e-12;
};

void add_method_options(CLI::App* sub, CommonOptions& opt) {
  sub->add_option("--method", opt.methods,
                  "method id: upsilon[p,q], psi11, rk4, rkgl[p]; repeatable; "
                  "bare names use --p/--q/--rho");
  sub->add_option("--p", opt.p, "decomposition / rkgl order (4 or 6)")
      ->check(CLI::IsMember({4, 6}));
  sub->add_option("--q", opt.q, "decomposition truncation: 6|8|10|12|exact")
      ->check(CLI::IsMember({"6", "8", "10", "12", "exact", "auto"}));
  sub->add_option("--rho", opt.rho, "rkgl fixed-point sweeps (default 4 or 6)");
}

void add_run_options(CLI::App* sub, CommonOptions& opt) {
  add_method_options(sub, opt);
  sub->add_option("--h", opt.hs, "step size(s); repeatable");
  sub->add_option("--steps", opt.steps, "step count(s); repeatable");
  sub->add_option("--t1", opt.t1, "end of the integration interval");
  sub->add_option("--out", opt.out, "output CSV path (default stdout)");
  sub->add_flag("--timing", opt.timing,
                "measure wall time per cell (off by default so repeated runs "
                "are byte-identical)");
  sub->add_option("--ref-tol", opt.ref_tol,
                  "reference ladder tolerance, absolute L1 per entry");
}

std::vector<MethodId> resolve_methods(const CommonOptions& opt, bool vector_mode) {
  std::vector<MethodId> out;
  if (opt.methods.empty()) {
    for (const auto& m : default_method_set())
      if (!vector_mode || m.supports_vector()) out.push_back(m);
    return out;
  }
  out.reserve(opt.methods.size());
  for (const auto& text : opt.methods)
    out.push_back(parse_method(text, opt.p, opt.q, opt.rho));
  return out;
}

std::vector<long> resolve_steps(const CommonOptions& opt, double t0, double t1,
                                const std::vector<long>& fallback) {
  if (!opt.steps.empty()) {
    for (long s : opt.steps)
      if (s < 1) throw CLI::ValidationError("--steps", "step counts must be >= 1");
    return opt.steps;
  }
  if (!opt.hs.empty()) {
    std::vector<long> out;
    for (double h : opt.hs) {
      if (h <= 0) throw CLI::ValidationError("--h", "step sizes must be positive");
      out.push_back(std::max<long>(1, std::lround((t1 - t0) / h)));
    }
    return out;
  }
  return fallback;
}

std::string format_meta(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void append_method_metadata(std::vector<std::string>& meta,
                            const std::vector<MethodId>& methods) {
  for (const auto& m : methods) {
    const auto documented = table2_cost(m);
    const auto measured = measured_cost(m);
    std::ostringstream line;
    line << "method " << m.label() << ": per-step C (ledger) = " << measured.c
         << ", per-step C (cost table) = " << documented.c;
    if (documented.v >= 0)
      line << ", per-step V = " << documented.v;
    meta.push_back(line.str());
  }
}

int emit(const CommonOptions& opt, const std::vector<std::string>& meta,
         const std::vector<ResultRow>& rows, bool with_omega = false) {
  int exit_code = 0;
  for (const auto& row : rows)
    if (row.failed) exit_code = 3;

  if (opt.out.empty()) {
    write_csv(std::cout, meta, rows, with_omega);
  } else {
    std::ofstream file(opt.out);
    if (!file) {
      std::cerr << "cannot open output file '" << opt.out << "'\n";
      return 2;
    }
    write_csv(file, meta, rows, with_omega);
    std::cerr << "wrote " << rows.size() << " rows to " << opt.out << "\n";
  }
  return exit_code;
}

int run_error_vs_cost(const CommonOptions& opt, const LinearProblem<double>& problem,
                      double t1, bool vector_mode,
                      const std::vector<long>& fallback_steps,
                      std::vector<std::string> meta) {
  const auto methods = resolve_methods(opt, vector_mode);
  const auto steps = resolve_steps(opt, 0.0, t1, fallback_steps);
  ReferenceEngine<double>::Options ref_options;
  ref_options.tolerance = opt.ref_tol;
  ReferenceEngine<double> reference(ref_options);

  meta.push_back("problem=" + problem.label);
  meta.push_back("t0=0 t1=" + format_meta(t1));
  meta.push_back(std::string("mode=") + (vector_mode ? "vector" : "matrix"));
  meta.push_back("reference-tolerance=" + format_meta(opt.ref_tol) + " (L1 per entry)");
  meta.push_back("error=L1 norm at t1 vs reference; cost=ledger units per run");
  append_method_metadata(meta, methods);

  const auto rows = vector_mode
                        ? run_vector(methods, problem, 0.0, t1, steps, reference, opt.timing)
                        : run_fundamental(methods, problem, 0.0, t1, steps, reference,
                                          opt.timing);
  return emit(opt, meta, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "magsym: symplectic Magnus-decomposition / Magnus-splitting integrator "
      "benchmarks for x'' + M(t) x = 0"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; [subcommand] sections");
  app.get_formatter()->column_width(34);

  // mathieu ------------------------------------------------------------
  CommonOptions mathieu_opt;
  double mathieu_omega = 1.0, mathieu_eps = 1.0;
  auto* mathieu_cmd =
      app.add_subcommand("mathieu", "error vs cost on the Mathieu equation");
  add_run_options(mathieu_cmd, mathieu_opt);
  mathieu_cmd->add_option("--omega", mathieu_omega, "frequency omega");
  mathieu_cmd->add_option("--eps", mathieu_eps, "forcing amplitude");
  mathieu_cmd->add_option("--mode", mathieu_opt.mode, "matrix or vector")
      ->check(CLI::IsMember({"matrix", "vector"}));

  // hill ---------------------------------------------------------------
  CommonOptions hill_opt;
  long hill_r = 5;
  double hill_eps = std::numeric_limits<double>::quiet_NaN();
  auto* hill_cmd =
      app.add_subcommand("hill", "error vs cost on the matrix Hill equation");
  add_run_options(hill_cmd, hill_opt);
  hill_cmd->add_option("--r", hill_r, "dimension r (Pascal perturbation)");
  hill_cmd->add_option("--eps", hill_eps, "amplitude; default eps = r");
  hill_cmd->add_option("--mode", hill_opt.mode, "matrix or vector")
      ->check(CLI::IsMember({"matrix", "vector"}));

  // wave ---------------------------------------------------------------
  CommonOptions wave_opt;
  wave_opt.mode = "vector";
  long wave_n = 128;
  double wave_delta = 1.0, wave_eps = 0.5;
  std::string wave_disc = "spectral";
  auto* wave_cmd = app.add_subcommand(
      "wave", "error vs cost on the space-discretised trapped wave equation");
  add_run_options(wave_cmd, wave_opt);
  wave_cmd->add_option("--n-grid", wave_n, "grid intervals N");
  wave_cmd->add_option("--delta", wave_delta, "forcing frequency");
  wave_cmd->add_option("--eps", wave_eps, "forcing amplitude");
  wave_cmd->add_option("--disc", wave_disc, "spatial discretisation")
      ->check(CLI::IsMember({"spectral", "fd2"}));
  wave_cmd->add_option("--mode", wave_opt.mode, "matrix or vector")
      ->check(CLI::IsMember({"matrix", "vector"}));

  // omega-sweep ----------------------------------------------------------
  CommonOptions sweep_opt;
  double sweep_eps = 1.0;
  std::vector<double> sweep_omegas;
  auto* sweep_cmd = app.add_subcommand(
      "omega-sweep", "Mathieu monodromy error vs omega at fixed step size");
  add_run_options(sweep_cmd, sweep_opt);
  sweep_cmd->add_option("--eps", sweep_eps, "forcing amplitude");
  sweep_cmd->add_option("--omegas", sweep_omegas,
                        "omega grid (default 0, 0.5, ..., 10)");

  // best-q ---------------------------------------------------------------
  CommonOptions bestq_opt;
  std::vector<double> bestq_eps;
  std::vector<double> bestq_omegas;
  std::vector<int> bestq_qs;
  long bestq_base_steps = 20;
  auto* bestq_cmd = app.add_subcommand(
      "best-q", "rank decomposition truncation orders per (eps, omega) cell");
  bestq_cmd->add_option("--eps", bestq_eps, "amplitudes (default 1, 0.1)");
  bestq_cmd->add_option("--omegas", bestq_omegas,
                        "omega grid (default 5^j, j = -3..3)");
  bestq_cmd->add_option("--q", bestq_qs, "candidate truncations (default 6 8 10 12)");
  bestq_cmd->add_option("--base-steps", bestq_base_steps,
                        "cost budget: base steps per unit omega");
  bestq_cmd->add_option("--out", bestq_opt.out, "output CSV path");
  bestq_cmd->add_option("--ref-tol", bestq_opt.ref_tol, "reference tolerance");

  // stability --------------------------------------------------------------
  CommonOptions stab_opt;
  std::string stab_problem = "mathieu";
  double stab_omega = 1.0, stab_eps = 0.0;
  long stab_r = 5;
  auto* stab_cmd = app.add_subcommand(
      "stability", "monodromy eigenvalues and stability flag over one period");
  add_run_options(stab_cmd, stab_opt);
  stab_cmd->add_option("--problem", stab_problem, "mathieu or hill")
      ->check(CLI::IsMember({"mathieu", "hill"}));
  stab_cmd->add_option("--omega", stab_omega, "Mathieu frequency");
  stab_cmd->add_option("--eps", stab_eps, "forcing amplitude");
  stab_cmd->add_option("--r", stab_r, "Hill dimension");

  // order-check ------------------------------------------------------------
  CommonOptions order_opt;
  std::string order_problem = "mathieu";
  double order_omega = 1.0, order_eps = 1.0;
  long order_r = 5;
  int order_levels = 5;
  double order_h0 = kPi / 10;
  auto* order_cmd = app.add_subcommand(
      "order-check", "least-squares convergence order over a halving h sequence");
  add_method_options(order_cmd, order_opt);
  order_cmd->add_option("--problem", order_problem, "mathieu or hill")
      ->check(CLI::IsMember({"mathieu", "hill"}));
  order_cmd->add_option("--omega", order_omega, "Mathieu frequency");
  order_cmd->add_option("--eps", order_eps, "forcing amplitude");
  order_cmd->add_option("--r", order_r, "Hill dimension");
  order_cmd->add_option("--h", order_h0, "largest step size");
  order_cmd->add_option("--levels", order_levels, "number of halvings (>= 4)");
  order_cmd->add_option("--t1", order_opt.t1, "end of interval (default pi)");
  order_cmd->add_option("--mode", order_opt.mode, "matrix or vector")
      ->check(CLI::IsMember({"matrix", "vector"}));
  order_cmd->add_option("--out", order_opt.out, "output CSV path");
  order_cmd->add_option("--ref-tol", order_opt.ref_tol, "reference tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(mathieu_cmd)) {
      const double t1 = mathieu_opt.t1 > 0 ? mathieu_opt.t1 : kPi;
      return run_error_vs_cost(
          mathieu_opt, mathieu_problem(mathieu_omega, mathieu_eps), t1,
          mathieu_opt.mode == "vector", {10, 20, 40, 80, 160},
          {"experiment=mathieu", "omega=" + format_meta(mathieu_omega),
           "eps=" + format_meta(mathieu_eps)});
    }

    if (app.got_subcommand(hill_cmd)) {
      const double eps = std::isnan(hill_eps) ? static_cast<double>(hill_r) : hill_eps;
      const double t1 = hill_opt.t1 > 0 ? hill_opt.t1 : kPi;
      return run_error_vs_cost(hill_opt, hill_problem<double>(hill_r, eps), t1,
                               hill_opt.mode == "vector", {10, 20, 40, 80, 160},
                               {"experiment=hill", "r=" + std::to_string(hill_r),
                                "eps=" + format_meta(eps)});
    }

    if (app.got_subcommand(wave_cmd)) {
      WaveConfig<double> config;
      config.n = wave_n;
      config.delta = wave_delta;
      config.eps = wave_eps;
      config.disc = wave_disc == "spectral" ? WaveDiscretization::spectral
                                            : WaveDiscretization::central_difference_2;
      const double t1 = wave_opt.t1 > 0 ? wave_opt.t1 : 20 * kPi / wave_delta;
      return run_error_vs_cost(
          wave_opt, wave_problem(config), t1, wave_opt.mode == "vector",
          {1000, 2000, 4000},
          {"experiment=wave", "n=" + std::to_string(wave_n),
           "delta=" + format_meta(wave_delta), "eps=" + format_meta(wave_eps),
           "x0=-10 x1=10 sigma=1", "disc=" + wave_disc});
    }

    if (app.got_subcommand(sweep_cmd)) {
      if (sweep_omegas.empty())
        for (int i = 0; i <= 20; ++i) sweep_omegas.push_back(0.5 * i);
      const double h = sweep_opt.hs.empty() ? kPi / 20 : sweep_opt.hs.front();
      const auto methods = resolve_methods(sweep_opt, false);
      ReferenceEngine<double>::Options ref_options;
      ref_options.tolerance = sweep_opt.ref_tol;
      ReferenceEngine<double> reference(ref_options);

      std::vector<std::string> meta = {
          "experiment=omega-sweep", "eps=" + format_meta(sweep_eps),
          "h=" + format_meta(h), "t0=0 t1=pi", "mode=matrix",
          "error=L1 norm of the monodromy error"};
      append_method_metadata(meta, methods);
      const auto rows =
          error_vs_omega(methods, sweep_eps, h, sweep_omegas, reference, sweep_opt.timing);
      return emit(sweep_opt, meta, rows, true);
    }

    if (app.got_subcommand(bestq_cmd)) {
      if (bestq_eps.empty()) bestq_eps = {1.0, 0.1};
      if (bestq_omegas.empty())
        for (int j = -3; j <= 3; ++j) bestq_omegas.push_back(std::pow(5.0, j));
      if (bestq_qs.empty()) bestq_qs = {6, 8, 10, 12};

      ReferenceEngine<double>::Options ref_options;
      ref_options.tolerance = bestq_opt.ref_tol;
      ReferenceEngine<double> reference(ref_options);
      const auto table =
          best_q_table(bestq_eps, bestq_omegas, bestq_qs, reference, bestq_base_steps);

      std::vector<std::string> meta = {
          "experiment=best-q",
          "problem=mathieu monodromy over [0, pi]",
          "criterion=L1 error at matched per-cell cost budget; "
          "budget = base-steps * max(1, omega) * ledger cost of q=6",
          "base-steps=" + std::to_string(bestq_base_steps),
          "rank=1 is best; rankings are reported for comparison, not asserted"};
      if (bestq_opt.out.empty()) {
        write_best_q_csv(std::cout, meta, table);
      } else {
        std::ofstream file(bestq_opt.out);
        if (!file) {
          std::cerr << "cannot open output file '" << bestq_opt.out << "'\n";
          return 2;
        }
        write_best_q_csv(file, meta, table);
        std::cerr << "wrote " << table.rows.size() << " rows to " << bestq_opt.out
                  << "\n";
      }
      for (const auto& row : table.rows)
        if (!std::isfinite(row.error_L1)) return 3;
      return 0;
    }

    if (app.got_subcommand(stab_cmd)) {
      const LinearProblem<double> problem =
          stab_problem == "hill" ? hill_problem<double>(stab_r, stab_eps)
                                 : mathieu_problem(stab_omega, stab_eps);
      const auto methods = resolve_methods(stab_opt, false);
      const MethodId method =
          stab_opt.methods.empty() ? parse_method("psi11", 4, "6", 0) : methods.front();
      const long steps = stab_opt.steps.empty()
                             ? (stab_opt.hs.empty()
                                    ? 200
                                    : std::max<long>(1, std::lround(kPi / stab_opt.hs.front())))
                             : stab_opt.steps.front();
      const auto report = stability_analysis(method, problem, kPi, steps);

      std::ostringstream body;
      body << "# experiment=stability\n"
           << "# problem=" << problem.label << "\n"
           << "# method=" << method.label() << " steps=" << steps << " period=pi\n"
           << "# stable=" << (report.stable ? "true" : "false")
           << " max_abs=" << format_sci(report.max_abs)
           << " pairing_defect=" << format_sci(report.pairing_defect) << "\n"
           << "method,lambda_re,lambda_im,lambda_abs\n";
      for (const auto& lam : report.eigenvalues)
        body << method.label() << "," << format_sci(lam.real()) << ","
             << format_sci(lam.imag()) << "," << format_sci(std::abs(lam)) << "\n";

      if (stab_opt.out.empty()) {
        std::cout << body.str();
      } else {
        std::ofstream file(stab_opt.out);
        if (!file) return 2;
        file << body.str();
      }
      return 0;
    }

    if (app.got_subcommand(order_cmd)) {
      if (order_levels < 2) throw CLI::ValidationError("--levels", "need >= 2");
      const LinearProblem<double> problem =
          order_problem == "hill" ? hill_problem<double>(order_r, order_eps)
                                  : mathieu_problem(order_omega, order_eps);
      const MethodId method = order_opt.methods.empty()
                                  ? parse_method("upsilon", order_opt.p, order_opt.q,
                                                 order_opt.rho)
                                  : parse_method(order_opt.methods.front(), order_opt.p,
                                                 order_opt.q, order_opt.rho);
      const double t1 = order_opt.t1 > 0 ? order_opt.t1 : kPi;
      std::vector<long> steps;
      for (int k = 0; k < order_levels; ++k)
        steps.push_back(std::max<long>(1, std::lround(t1 / (order_h0 / (1 << k)))));

      ReferenceEngine<double>::Options ref_options;
      ref_options.tolerance = order_opt.ref_tol;
      ReferenceEngine<double> reference(ref_options);
      const auto report = convergence_order(
          method, problem, 0.0, t1, steps, reference,
          order_opt.mode == "vector" ? RunMode::vector_mode : RunMode::matrix);

      std::vector<std::string> meta = {"experiment=order-check",
                                       "problem=" + problem.label,
                                       "method=" + method.label(),
                                       "mode=" + order_opt.mode};
      meta.push_back(report.slope ? "slope=" + format_meta(*report.slope)
                                  : "slope=undefined (all points at the floor)");
      const int code = emit(order_opt, meta, report.rows);
      std::cerr << "estimated order: "
                << (report.slope ? format_meta(*report.slope) : "undefined") << "\n";
      return code;
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
