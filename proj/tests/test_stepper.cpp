#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cnrm/stepper.hpp"
#include "oracles.hpp"

using namespace cnrm;

TEST_CASE("analytic_solution: initial profile, boundaries, spot value") {
  CHECK(analytic_solution(0.25, 0.0, 1.0) ==
        doctest::Approx(std::sin(std::numbers::pi * 0.25)).epsilon(1e-15));
  CHECK(analytic_solution(0.0, 3.0, 1.0) == 0.0);
  CHECK(analytic_solution(1.0, 3.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  const double t = 1.0 / (std::numbers::pi * std::numbers::pi);
  CHECK(analytic_solution(0.5, t, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(analytic_solution(0.5, t, 1.0) == doctest::Approx(0.367879441171442).epsilon(1e-12));
}

TEST_CASE("solve_heat: D = 0 keeps the field constant in time") {
  const HeatProblem p = sine_benchmark_problem(0.0);
  const Grid g = make_grid(p, 8, 5, 1.0);
  const Field f = solve_heat(p, g, SolverKind::direct);
  for (std::size_t m = 0; m <= 5; ++m) {
    for (std::size_t n = 0; n <= 8; ++n) {
      CHECK(f.at(m, n) == doctest::Approx(p.initial(g.node_x(n))).epsilon(1e-14));
    }
  }
}

TEST_CASE("solve_heat: one step equals the dense solve of the per-step system") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  // N=4, dx=0.25: choose dt so the diffusion number is exactly 1.
  const Grid g = make_grid(p, 4, 1, 0.0625);
  CHECK(g.diffusion_number == doctest::Approx(1.0).epsilon(1e-14));
  const Field f = solve_heat(p, g, SolverKind::direct);

  const CNSystem sys = assemble_cn(g);
  std::vector<double> u0(3);
  for (std::size_t i = 0; i < 3; ++i) u0[i] = p.initial(g.node_x(i + 1));
  const auto rhs = build_rhs(sys, g, p, u0, 0);
  const auto dense = oracle::dense_solve(sys.A, rhs);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(f.at(1, i + 1) - dense[i]) <= 1e-12);
  }
}

TEST_CASE("solve_heat: per-step residual of the direct march stays at 1e-12") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const Grid g = make_grid(p, 10, 20, 0.2);
  const Field f = solve_heat(p, g, SolverKind::direct);
  const CNSystem sys = assemble_cn(g);
  const std::size_t interior = g.interior();
  std::vector<double> u(interior), next(interior);
  for (std::size_t m = 0; m < g.num_steps; ++m) {
    for (std::size_t i = 0; i < interior; ++i) {
      u[i] = f.at(m, i + 1);
      next[i] = f.at(m + 1, i + 1);
    }
    const auto rhs = build_rhs(sys, g, p, u, m);
    const auto lhs = matvec(sys.A, next);
    double r = 0.0;
    for (std::size_t i = 0; i < interior; ++i) r += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
    CHECK(std::sqrt(r) <= 1e-12);
  }
}

TEST_CASE("solve_heat: discrete maximum principle for a <= 1") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const Grid g = make_grid(p, 10, 100, 1.0);  // a = 1
  REQUIRE(g.diffusion_number <= 1.0 + 1e-12);
  const Field f = solve_heat(p, g, SolverKind::direct);
  for (double v : f.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("solve_heat: rm solver with zero noise approaches the direct field") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const Grid g = make_grid(p, 10, 3, 0.03);
  const Field direct = solve_heat(p, g, SolverKind::direct);

  RMConfig rm;
  rm.max_iters = 100000;
  rm.x_init.assign(g.interior(), 0.0);  // replaced by the warm start
  rm.seed = 5;
  const NoiseModel silent{NoiseKind::zero, 0.0, g.interior(), 0.0};
  const Field stochastic = solve_heat(p, g, SolverKind::rm, &rm, &silent);

  double diff = 0.0;
  for (std::size_t idx = 0; idx < direct.values.size(); ++idx) {
    diff = std::max(diff, std::abs(direct.values[idx] - stochastic.values[idx]));
  }
  CHECK(diff <= 1e-4);
}

TEST_CASE("solve_heat: rm solver requires config and noise") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const Grid g = make_grid(p, 4, 1, 0.1);
  CHECK_THROWS_AS(solve_heat(p, g, SolverKind::rm), std::invalid_argument);
}

TEST_CASE("order_study: second-order ratios on the sine benchmark") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const auto exact = [](double x, double t) { return analytic_solution(x, t, 1.0); };
  const auto rows = order_study(p, exact, 10, 10, 0.5, 4);
  REQUIRE(rows.size() == 4);
  CHECK(std::isnan(rows[0].ratio));
  for (std::size_t l = 1; l < rows.size(); ++l) {
    CHECK(rows[l].ratio > 3.3);
    CHECK(rows[l].ratio < 4.7);
  }
  CHECK(rows[1].dx == doctest::Approx(rows[0].dx / 2.0));
  CHECK(rows[1].dt == doctest::Approx(rows[0].dt / 2.0));
}

TEST_CASE("order_study: D = 0 gives zero error at every level") {
  const HeatProblem p = sine_benchmark_problem(0.0);
  const auto exact = [&p](double x, double) { return p.initial(x); };
  const auto rows = order_study(p, exact, 4, 2, 1.0, 3);
  for (const auto& row : rows) CHECK(row.max_err <= 1e-14);
}

TEST_CASE("order_study: single level reports error without a ratio") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const auto exact = [](double x, double t) { return analytic_solution(x, t, 1.0); };
  const auto rows = order_study(p, exact, 10, 10, 0.5, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].max_err > 0.0);
  CHECK(std::isnan(rows[0].ratio));
}

TEST_CASE("write_field_csv: x header row plus one row per level") {
  const HeatProblem p = sine_benchmark_problem(1.0);
  const Grid g = make_grid(p, 4, 2, 0.1);
  const Field f = solve_heat(p, g, SolverKind::direct);
  std::ostringstream os;
  write_field_csv(os, f);
  const std::string text = os.str();
  std::size_t lines = 0;
  for (char c : text) lines += (c == '\n');
  CHECK(lines == 1 + 3);  // header + (M+1) levels
  CHECK(text.substr(0, 2) == "0,");
}
