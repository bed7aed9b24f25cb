#include "cnrm/crank_nicolson.hpp"

#include <stdexcept>

namespace cnrm {

void HeatProblem::validate() const {
  if (!(diffusivity >= 0.0)) {
    throw std::invalid_argument("HeatProblem: diffusivity must be nonnegative");
  }
  if (!(x_hi > x_lo)) {
    throw std::invalid_argument("HeatProblem: x_hi must exceed x_lo");
  }
  if (!initial || !boundary_lo || !boundary_hi) {
    throw std::invalid_argument("HeatProblem: initial and boundary functions must be set");
  }
}

Grid make_grid(const HeatProblem& problem, std::size_t num_intervals, std::size_t num_steps,
               double t_end) {
  problem.validate();
  if (num_intervals < 2) {
    throw std::invalid_argument("make_grid: need at least 2 space intervals");
  }
  if (num_steps < 1) {
    throw std::invalid_argument("make_grid: need at least 1 time step");
  }
  if (!(t_end > 0.0)) {
    throw std::invalid_argument("make_grid: t_end must be positive");
  }
  Grid g;
  g.num_intervals = num_intervals;
  g.num_steps = num_steps;
  g.t_end = t_end;
  g.x_lo = problem.x_lo;
  g.dx = (problem.x_hi - problem.x_lo) / static_cast<double>(num_intervals);
  g.dt = t_end / static_cast<double>(num_steps);
  g.diffusion_number = problem.diffusivity * g.dt / (g.dx * g.dx);
  return g;
}

CNSystem cn_system(double diffusion_number, std::size_t num_intervals) {
  if (num_intervals < 2) {
    throw std::invalid_argument("cn_system: need at least 2 space intervals");
  }
  if (!(diffusion_number >= 0.0)) {
    throw std::invalid_argument("cn_system: diffusion number must be nonnegative");
  }
  const std::size_t n = num_intervals - 1;
  const double a = diffusion_number;
  const double diag_a = 2.0 + 2.0 * a;
  // B's diagonal is taken as 4 - diag(A) rather than 2 - 2a so the stencil
  // identity A + B = 4I holds exactly in floating point; the two expressions
  // agree to the last bit whenever 2 + 2a is exactly representable.
  return CNSystem{TriDiag::constant(n, diag_a, -a), TriDiag::constant(n, 4.0 - diag_a, a)};
}

CNSystem assemble_cn(const Grid& grid) {
  return cn_system(grid.diffusion_number, grid.num_intervals);
}

std::vector<double> build_rhs(const CNSystem& sys, double diffusion_number,
                              std::span<const double> u_m, double lo_m, double hi_m,
                              double lo_m1, double hi_m1) {
  if (u_m.size() != sys.B.size()) {
    throw std::invalid_argument("build_rhs: interior level length does not match system");
  }
  std::vector<double> rhs = matvec(sys.B, u_m);
  const double a = diffusion_number;
  // w_m - r_{m+1}: only the first and last entries are nonzero.
  rhs.front() += a * (lo_m + lo_m1);
  rhs.back() += a * (hi_m + hi_m1);
  return rhs;
}

std::vector<double> build_rhs(const CNSystem& sys, const Grid& grid, const HeatProblem& problem,
                              std::span<const double> u_m, std::size_t m) {
  const double t0 = grid.node_t(m);
  const double t1 = grid.node_t(m + 1);
  return build_rhs(sys, grid.diffusion_number, u_m, problem.boundary_lo(t0),
                   problem.boundary_hi(t0), problem.boundary_lo(t1), problem.boundary_hi(t1));
}

}  // namespace cnrm
