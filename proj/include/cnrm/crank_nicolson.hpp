#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cnrm/tridiag.hpp"

namespace cnrm {

/// 1-D heat problem u_t = D u_xx on [x_lo, x_hi] with Dirichlet data.
///
/// D = 0 is accepted as the degenerate no-diffusion limit. Corner
/// compatibility between `initial` and the boundary functions is not
/// required.
struct HeatProblem {
  double diffusivity = 1.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::function<double(double)> initial;      // f(x)
  std::function<double(double)> boundary_lo;  // g_lo(t)
  std::function<double(double)> boundary_hi;  // g_hi(t)

  void validate() const;
};

/// Uniform space-time grid: N space intervals, M time steps up to t_end.
struct Grid {
  std::size_t num_intervals = 0;  // N >= 2
  std::size_t num_steps = 0;      // M >= 1
  double t_end = 0.0;
  double x_lo = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  double diffusion_number = 0.0;  // a = D*dt/dx^2

  std::size_t interior() const { return num_intervals - 1; }
  double node_x(std::size_t n) const { return x_lo + static_cast<double>(n) * dx; }
  double node_t(std::size_t m) const { return static_cast<double>(m) * dt; }
};

Grid make_grid(const HeatProblem& problem, std::size_t num_intervals, std::size_t num_steps,
               double t_end);

/// The square per-step system A u_{m+1} = B u_m + boundary terms.
///
/// A has diagonal 2+2a and off-diagonals -a; B has diagonal 2-2a and
/// off-diagonals +a. Both are symmetric of dimension N-1 and satisfy
/// A + B = 4 I.
struct CNSystem {
  TriDiag A;
  TriDiag B;
};

/// Assemble A and B for a given diffusion number and interval count.
CNSystem cn_system(double diffusion_number, std::size_t num_intervals);

CNSystem assemble_cn(const Grid& grid);

/// Right-hand side B u_m + w_m - r_{m+1} with explicit boundary values
/// u_{0,m}, u_{N,m}, u_{0,m+1}, u_{N,m+1}.
std::vector<double> build_rhs(const CNSystem& sys, double diffusion_number,
                              std::span<const double> u_m, double lo_m, double hi_m,
                              double lo_m1, double hi_m1);

/// Right-hand side for time step m of the discretized problem; boundary
/// values are read from the problem's Dirichlet data at t_m and t_{m+1}.
std::vector<double> build_rhs(const CNSystem& sys, const Grid& grid, const HeatProblem& problem,
                              std::span<const double> u_m, std::size_t m);

}  // namespace cnrm
