#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "cnrm/crank_nicolson.hpp"
#include "cnrm/robbins_monro.hpp"

namespace cnrm {

/// Space-time solution array: (M+1) time levels of (N+1) node values.
/// Row 0 is the initial condition at the grid nodes; columns 0 and N hold
/// the Dirichlet data for every later level.
struct Field {
  Grid grid;
  std::vector<double> values;  // row-major, (M+1) x (N+1)

  std::size_t rows() const { return grid.num_steps + 1; }
  std::size_t cols() const { return grid.num_intervals + 1; }
  double at(std::size_t m, std::size_t n) const { return values[m * cols() + n]; }
  double& at(std::size_t m, std::size_t n) { return values[m * cols() + n]; }
};

enum class SolverKind { direct, rm };

/// March the discretized problem over all time steps.
///
/// direct: each level solves the per-step system with the Thomas algorithm.
/// rm: each level runs the stochastic iteration, warm-started from the
/// previous level, with a fresh noise stream per step derived from
/// (rm_cfg->seed, step index). rm requires rm_cfg and noise.
Field solve_heat(const HeatProblem& problem, const Grid& grid, SolverKind solver,
                 const RMConfig* rm_cfg = nullptr, const NoiseModel* noise = nullptr);

/// Exact solution sin(pi x) exp(-D pi^2 t) of the sine benchmark problem on
/// [0,1] with zero boundary values.
double analytic_solution(double x, double t, double diffusivity);

/// The canonical benchmark problem for `analytic_solution`.
HeatProblem sine_benchmark_problem(double diffusivity);

struct OrderLevel {
  std::size_t num_intervals = 0;
  std::size_t num_steps = 0;
  double dx = 0.0;
  double dt = 0.0;
  double max_err = 0.0;  // max norm over all nodes at t_end
  double ratio = 0.0;    // err(previous level) / err(this level); NaN for the first
};

/// Grid refinement study: each level halves dx and dt; errors are measured
/// against the supplied exact solution at t_end. Second-order accuracy shows
/// up as consecutive ratios near 4.
std::vector<OrderLevel> order_study(const HeatProblem& problem,
                                    const std::function<double(double, double)>& exact,
                                    std::size_t base_intervals, std::size_t base_steps,
                                    double t_end, std::size_t levels,
                                    SolverKind solver = SolverKind::direct,
                                    const RMConfig* rm_cfg = nullptr,
                                    const NoiseModel* noise = nullptr);

/// CSV export: one header row of x-coordinates, then one row per time level.
void write_field_csv(std::ostream& os, const Field& field);

}  // namespace cnrm
