#include "doctest.h"

#include <cmath>
#include <sstream>

#include "magsym/bench.hpp"

using namespace magsym;

TEST_CASE("method parsing and labels") {
  CHECK(parse_method("upsilon[4,6]", 6, "8", 0).label() == "upsilon[4,6]");
  CHECK(parse_method("upsilon[6,exact]", 4, "6", 0).label() == "upsilon[6,exact]");
  CHECK(parse_method("upsilon", 6, "12", 0).label() == "upsilon[6,12]");
  CHECK(parse_method("psi11", 4, "6", 0).label() == "psi11");
  CHECK(parse_method("rkgl[6]", 4, "6", 0).label() == "rkgl[6]");
  CHECK(parse_method("rkgl[4,7]", 4, "6", 0).label() == "rkgl[4,rho=7]");
  CHECK_THROWS_AS((void)parse_method("magnus", 4, "6", 0), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_method("upsilon[5,6]", 4, "6", 0), std::invalid_argument);
}

TEST_CASE("ledger totals match the per-step accounting") {
  const auto problem = hill_problem(3, 1.0);
  const long steps = 10;
  const double t1 = pi<double>;

  struct Case {
    const char* spec;
    long long total_c;
  };
  for (const Case c : {Case{"upsilon[4,6]", 6 * steps + 2},
                       Case{"upsilon[6,8]", 15 * steps + 2},
                       Case{"psi11", 22 * steps},
                       Case{"rk4", 8 * steps},
                       Case{"rkgl[4]", 16 * steps},
                       Case{"rkgl[6]", 36 * steps}}) {
    const auto method = parse_method(c.spec, 4, "6", 0);
    const auto run = propagate_fundamental(method, problem, 0.0, t1, steps);
    CHECK_MESSAGE(run.ledger.matmat == c.total_c, c.spec);
    CHECK(run.ledger.matvec == 0);
  }

  struct VCase {
    const char* spec;
    long long total_v;
  };
  for (const VCase c :
       {VCase{"psi11", 11 * steps}, VCase{"rk4", 4 * steps}, VCase{"rkgl[6]", 18 * steps}}) {
    const auto method = parse_method(c.spec, 4, "6", 0);
    const auto run = propagate_state(method, problem, problem.default_state(), 0.0, t1, steps);
    CHECK_MESSAGE(run.ledger.matvec == c.total_v, c.spec);
    CHECK(run.ledger.matmat == 0);
  }
}

TEST_CASE("vector mode rejects matrix-only methods") {
  const auto problem = mathieu_problem(1.0, 0.0);
  const auto method = parse_method("upsilon[4,6]", 4, "6", 0);
  CHECK_THROWS_AS(
      (void)propagate_state(method, problem, problem.default_state(), 0.0, 1.0, 4),
      std::invalid_argument);
}

TEST_CASE("exact decomposition on an autonomous problem hits reference accuracy") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(1.0, 0.0);
  const auto method = parse_method("upsilon[4,exact]", 4, "6", 0);
  for (long steps : {7, 20}) {
    const ResultRow row =
        run_matrix_cell(method, problem, 0.0, pi<double>, steps, reference);
    CHECK(!row.failed);
    CHECK(row.error_L1 <= 1e-10);
  }
}

TEST_CASE("per-row failure capture keeps the sweep alive") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(100.0, 0.0);
  // rkgl at an oversized step diverges; the row records it
  const auto bad = parse_method("rkgl[4]", 4, "6", 0);
  const auto rows = run_fundamental({bad, parse_method("psi11", 4, "6", 0)}, problem,
                                    0.0, 2.0, {2}, reference);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].failed);
  CHECK(rows[0].note.find("diverged") != std::string::npos);
  CHECK(!rows[1].failed);
}

TEST_CASE("csv writing is deterministic") {
  ReferenceEngine<double> ra, rb;
  const std::vector<MethodId> methods = {parse_method("upsilon[4,6]", 4, "6", 0),
                                         parse_method("rk4", 4, "6", 0)};
  const std::vector<double> omegas = {0.0, 0.5, 1.0};
  auto render = [&](ReferenceEngine<double>& engine) {
    const auto rows = error_vs_omega(methods, 1.0, pi<double> / 20, omegas, engine);
    std::ostringstream os;
    write_csv(os, {"experiment=omega-sweep", "eps=1"}, rows, true);
    return os.str();
  };
  const std::string first = render(ra);
  const std::string second = render(rb);
  CHECK(first == second);
  CHECK(first.find("method,omega,h,steps,cost_C,cost_V,error_L1,defect,wall_ms\n") !=
        std::string::npos);
}

TEST_CASE("csv golden shape for a single row") {
  std::ostringstream os;
  ResultRow row;
  row.method = "rk4";
  row.h = 0.5;
  row.steps = 2;
  row.cost_C = 16;
  row.cost_V = 0;
  row.error_L1 = 1.0 / 3.0;
  row.defect = 0.0;
  write_csv(os, {"meta"}, {row});
  CHECK(os.str() ==
        "# meta\n"
        "method,h,steps,cost_C,cost_V,error_L1,defect,wall_ms\n"
        "rk4,5.0000000000000000e-01,2,16,0,3.3333333333333331e-01,"
        "0.0000000000000000e+00,0.0000000000000000e+00\n");
}

TEST_CASE("fit_order recovers a synthetic slope and honours the floor") {
  std::vector<ResultRow> rows;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    ResultRow r;
    r.h = h;
    r.error_L1 = 3.0 * std::pow(h, 4);
    rows.push_back(r);
  }
  auto slope = fit_order(rows);
  REQUIRE(slope.has_value());
  CHECK(*slope == doctest::Approx(4.0).epsilon(1e-10));

  for (auto& r : rows) r.error_L1 = 1e-15;  // everything at the floor
  CHECK(!fit_order(rows).has_value());
}

TEST_CASE("convergence_order on rk4 against the reference") {
  ReferenceEngine<double> reference;
  const auto problem = mathieu_problem(1.0, 1.0);
  const auto report =
      convergence_order(parse_method("rk4", 4, "6", 0), problem, 0.0, pi<double>,
                        {10, 20, 40, 80}, reference);
  REQUIRE(report.slope.has_value());
  CHECK(*report.slope == doctest::Approx(4.0).epsilon(0.08));
}

TEST_CASE("stability analysis of the harmonic oscillator at omega = 1") {
  const auto problem = mathieu_problem(1.0, 0.0);
  const auto report = stability_analysis(parse_method("psi11", 4, "6", 0), problem,
                                         pi<double>, 200);
  REQUIRE(report.eigenvalues.size() == 2);
  for (const auto& lam : report.eigenvalues)
    CHECK(std::abs(lam - std::complex<double>(-1.0, 0.0)) <= 1e-6);
  CHECK(report.stable);
  CHECK(report.pairing_defect <= 1e-6);
}

TEST_CASE("reciprocal pairing holds off the stability boundary too") {
  const auto problem = mathieu_problem(0.95, 0.5);
  const auto report = stability_analysis(parse_method("psi11", 4, "6", 0), problem,
                                         pi<double>, 200);
  CHECK(report.pairing_defect <= 1e-6);
}

TEST_CASE("hill monodromy eigenvalues come in reciprocal pairs") {
  const auto problem = hill_problem(5, 0.5);
  const auto report = stability_analysis(parse_method("psi11", 4, "6", 0), problem,
                                         pi<double>, 100);
  CHECK(report.eigenvalues.size() == 10);
  CHECK(report.pairing_defect <= 1e-6);
}

TEST_CASE("best-q table runs its grid and ranks deterministically") {
  ReferenceEngine<double> ra, rb;
  const std::vector<double> eps_set = {1.0};
  const std::vector<double> omega_set = {0.2, 1.0};
  const std::vector<int> q_set = {6, 8};
  const auto ta = best_q_table(eps_set, omega_set, q_set, ra);
  const auto tb = best_q_table(eps_set, omega_set, q_set, rb);

  REQUIRE(ta.rows.size() == 2 * 2 * 2);  // families x omegas x qs
  for (const auto& row : ta.rows) {
    CHECK(row.rank >= 1);
    CHECK(row.rank <= 2);
    CHECK(std::isfinite(row.error_L1));
  }
  REQUIRE(ta.summary.size() == 2);

  std::ostringstream osa, osb;
  write_best_q_csv(osa, {"experiment=best-q"}, ta);
  write_best_q_csv(osb, {"experiment=best-q"}, tb);
  CHECK(osa.str() == osb.str());
}
