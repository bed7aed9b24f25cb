#include "cnrm/stepper.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "cnrm/csv.hpp"

namespace cnrm {

Field solve_heat(const HeatProblem& problem, const Grid& grid, SolverKind solver,
                 const RMConfig* rm_cfg, const NoiseModel* noise) {
  problem.validate();
  if (solver == SolverKind::rm && (rm_cfg == nullptr || noise == nullptr)) {
    throw std::invalid_argument("solve_heat: rm solver requires an RMConfig and a NoiseModel");
  }
  const CNSystem sys = assemble_cn(grid);
  const std::size_t n_cols = grid.num_intervals + 1;
  const std::size_t interior = grid.interior();

  Field field{grid, std::vector<double>((grid.num_steps + 1) * n_cols, 0.0)};
  for (std::size_t n = 0; n < n_cols; ++n) {
    field.at(0, n) = problem.initial(grid.node_x(n));
  }
  for (std::size_t m = 1; m <= grid.num_steps; ++m) {
    field.at(m, 0) = problem.boundary_lo(grid.node_t(m));
    field.at(m, grid.num_intervals) = problem.boundary_hi(grid.node_t(m));
  }

  std::vector<double> u(interior);
  for (std::size_t i = 0; i < interior; ++i) u[i] = field.at(0, i + 1);

  for (std::size_t m = 0; m < grid.num_steps; ++m) {
    const std::vector<double> rhs = build_rhs(sys, grid, problem, u, m);
    if (solver == SolverKind::direct) {
      u = thomas_solve(sys.A, rhs);
    } else {
      RMConfig step_cfg = *rm_cfg;
      step_cfg.x_init = u;  // warm start from the previous level
      step_cfg.seed = derive_stream(rm_cfg->seed, m);
      step_cfg.checkpoints.clear();
      step_cfg.store_iterates = false;
      step_cfg.store_noise = false;
      NoiseModel step_noise = *noise;
      step_noise.dim = interior;
      u = rm_solve(sys.A, rhs, step_cfg, step_noise).x;
    }
    for (std::size_t i = 0; i < interior; ++i) field.at(m + 1, i + 1) = u[i];
  }
  return field;
}

double analytic_solution(double x, double t, double diffusivity) {
  const double pi = std::numbers::pi;
  return std::sin(pi * x) * std::exp(-diffusivity * pi * pi * t);
}

HeatProblem sine_benchmark_problem(double diffusivity) {
  HeatProblem p;
  p.diffusivity = diffusivity;
  p.x_lo = 0.0;
  p.x_hi = 1.0;
  p.initial = [](double x) { return std::sin(std::numbers::pi * x); };
  p.boundary_lo = [](double) { return 0.0; };
  p.boundary_hi = [](double) { return 0.0; };
  return p;
}

std::vector<OrderLevel> order_study(const HeatProblem& problem,
                                    const std::function<double(double, double)>& exact,
                                    std::size_t base_intervals, std::size_t base_steps,
                                    double t_end, std::size_t levels, SolverKind solver,
                                    const RMConfig* rm_cfg, const NoiseModel* noise) {
  if (levels < 1) throw std::invalid_argument("order_study: need at least one level");
  if (!exact) throw std::invalid_argument("order_study: exact solution required");

  std::vector<OrderLevel> out;
  out.reserve(levels);
  for (std::size_t level = 0; level < levels; ++level) {
    const std::size_t n_int = base_intervals << level;
    const std::size_t n_steps = base_steps << level;
    const Grid grid = make_grid(problem, n_int, n_steps, t_end);

    RMConfig level_cfg;
    const RMConfig* cfg_ptr = rm_cfg;
    if (solver == SolverKind::rm && rm_cfg != nullptr) {
      level_cfg = *rm_cfg;
      level_cfg.seed = derive_stream(rm_cfg->seed, level);
      cfg_ptr = &level_cfg;
    }
    const Field field = solve_heat(problem, grid, solver, cfg_ptr, noise);

    OrderLevel row;
    row.num_intervals = n_int;
    row.num_steps = n_steps;
    row.dx = grid.dx;
    row.dt = grid.dt;
    row.max_err = 0.0;
    for (std::size_t n = 0; n <= n_int; ++n) {
      const double e = std::abs(field.at(n_steps, n) - exact(grid.node_x(n), t_end));
      row.max_err = std::max(row.max_err, e);
    }
    row.ratio = out.empty() ? std::numeric_limits<double>::quiet_NaN()
                            : out.back().max_err / row.max_err;
    out.push_back(row);
  }
  return out;
}

void write_field_csv(std::ostream& os, const Field& field) {
  const std::size_t cols = field.cols();
  for (std::size_t n = 0; n < cols; ++n) {
    os << fmt17(field.grid.node_x(n)) << (n + 1 < cols ? "," : "\n");
  }
  for (std::size_t m = 0; m < field.rows(); ++m) {
    for (std::size_t n = 0; n < cols; ++n) {
      os << fmt17(field.at(m, n)) << (n + 1 < cols ? "," : "\n");
    }
  }
}

}  // namespace cnrm
