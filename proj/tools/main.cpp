#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cnrm/analysis.hpp"
#include "cnrm/csv.hpp"
#include "cnrm/run_config.hpp"
#include "cnrm/stepper.hpp"

namespace {

using namespace cnrm;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;
};

RunConfig load_config(const Overrides& ov) {
  RunConfig cfg = parse_config_file(ov.config_path);
  if (ov.out) cfg.out = *ov.out;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.solver) {
    if (*ov.solver == "direct") cfg.solver = SolverKind::direct;
    else if (*ov.solver == "rm") cfg.solver = SolverKind::rm;
    else throw ConfigError("--solver must be 'direct' or 'rm'");
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open output file");
  return os;
}

int cmd_solve(const Overrides& ov) {
  const RunConfig cfg = load_config(ov);
  const HeatProblem problem = make_problem(cfg);
  const Grid grid = make_grid(problem, cfg.N, cfg.M, cfg.t_end);

  const RMConfig rm = make_rm_config(cfg, grid.interior());
  const NoiseModel noise = make_noise(cfg, grid.interior());
  const Field field = solve_heat(problem, grid, cfg.solver,
                                 cfg.solver == SolverKind::rm ? &rm : nullptr,
                                 cfg.solver == SolverKind::rm ? &noise : nullptr);

  std::optional<double> max_err;
  if (analytic_available(cfg)) {
    double e = 0.0;
    for (std::size_t m = 0; m <= grid.num_steps; ++m) {
      for (std::size_t n = 0; n <= grid.num_intervals; ++n) {
        e = std::max(e, std::abs(field.at(m, n) -
                                 analytic_solution(grid.node_x(n), grid.node_t(m), cfg.D)));
      }
    }
    max_err = e;
  }

  auto os = open_out(cfg.out);
  os << config_header(cfg, "solve");
  if (max_err) os << "# max_error_vs_analytic = " << fmt17(*max_err) << "\n";
  write_field_csv(os, field);

  std::cout << "solve: wrote " << cfg.out;
  if (max_err) std::cout << "; max_error_vs_analytic = " << fmt17(*max_err);
  std::cout << "\n";
  return 0;
}

int cmd_order(const Overrides& ov) {
  const RunConfig cfg = load_config(ov);
  if (!analytic_available(cfg)) {
    throw ConfigError(
        "order study requires the sine benchmark: ic = sine, zero boundaries, domain [0,1]");
  }
  const HeatProblem problem = make_problem(cfg);
  const double D = cfg.D;
  const auto exact = [D](double x, double t) { return analytic_solution(x, t, D); };

  const RMConfig rm = make_rm_config(cfg, 1);  // dimension is reset per level
  const NoiseModel noise = make_noise(cfg, 1);
  const auto levels = order_study(problem, exact, cfg.N, cfg.M, cfg.t_end, cfg.levels, cfg.solver,
                                  cfg.solver == SolverKind::rm ? &rm : nullptr,
                                  cfg.solver == SolverKind::rm ? &noise : nullptr);

  auto os = open_out(cfg.out);
  os << config_header(cfg, "order");
  os << "dx,dt,err,ratio\n";
  for (const auto& row : levels) {
    os << fmt17(row.dx) << "," << fmt17(row.dt) << "," << fmt17(row.max_err) << ",";
    if (std::isfinite(row.ratio)) os << fmt17(row.ratio);
    os << "\n";
  }

  std::cout << "order: wrote " << cfg.out << "; ratios:";
  for (const auto& row : levels) {
    if (std::isfinite(row.ratio)) std::cout << " " << fmt17(row.ratio);
  }
  std::cout << "\n";
  return 0;
}

// Interior initial profile and the first-step right-hand side: the study
// solves the m = 0 system of the configured problem.
void first_step_system(const RunConfig& cfg, CNSystem& sys, std::vector<double>& rhs,
                       Grid& grid_out) {
  const HeatProblem problem = make_problem(cfg);
  const Grid grid = make_grid(problem, cfg.N, cfg.M, cfg.t_end);
  sys = assemble_cn(grid);
  std::vector<double> u0(grid.interior());
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = problem.initial(grid.node_x(i + 1));
  rhs = build_rhs(sys, grid, problem, u0, 0);
  grid_out = grid;
}

int cmd_rm_study(const Overrides& ov) {
  const RunConfig cfg = load_config(ov);
  CNSystem sys;
  std::vector<double> rhs;
  Grid grid;
  first_step_system(cfg, sys, rhs, grid);

  const RMConfig rm = make_rm_config(cfg, grid.interior());
  const NoiseModel noise = make_noise(cfg, grid.interior());

  BoundParams bp;
  bool have_bounds = false;
  bool fitted = false;
  if (cfg.bound_p > 0.0 && cfg.bound_alpha > 0.0) {
    bp.p = cfg.bound_p;
    bp.alpha = cfg.bound_alpha;
    bp.noise_bound = cfg.noise_b;
    have_bounds = true;
  } else if (noise.kind != NoiseKind::zero) {
    const ProductNormTable table(sys.A, cfg.k_max, cfg.rm_gain);
    const Lemma1Fit fit = fit_lemma1(table);
    if (fit.feasible) {
      bp.gamma = fit.gamma;
      bp.p = fit.p;
      bp.C = fit_lemma2_constant(table, fit.gamma, fit.p);
      bp.noise_bound = noise.bound;
      bp.alpha = 8.0 * bp.C * (bp.gamma * noise.bound) * (bp.gamma * noise.bound);
      have_bounds = fitted = true;
    }
  }

  const StudyReport report = aco_study(sys.A, rhs, rm, noise, cfg.epsilon, cfg.replications,
                                       have_bounds ? &bp : nullptr);

  const double two_p = 2.0 * bp.p;
  const bool agree = have_bounds && std::isfinite(report.rate_q) &&
                     std::abs(report.rate_q - two_p) <= 0.25 * std::max(1.0, two_p);

  auto os = open_out(cfg.out);
  os << config_header(cfg, "rm-study");
  os << "# epsilon_used = " << fmt17(report.epsilon) << "\n";
  os << "# noise_floor = " << fmt17(report.noise_floor) << "\n";
  os << "# spectral_ok = " << (report.spectral_ok ? 1 : 0) << "\n";
  os << "# det_below_half_eps_at_k = " << report.det_below_half_eps_at << "\n";
  if (have_bounds) {
    os << "# bound_gamma = " << fmt17(bp.gamma) << "\n";
    os << "# bound_p = " << fmt17(bp.p) << "\n";
    os << "# bound_C = " << fmt17(bp.C) << "\n";
    os << "# bound_alpha = " << fmt17(bp.alpha) << "\n";
    os << "# bound_source = " << (fitted ? "fitted" : "config") << "\n";
  }
  os << "# rate_q = " << fmt17(report.rate_q) << "\n";
  if (have_bounds) {
    os << "# paper_rate_2p = " << fmt17(two_p) << "\n";
    os << "# rate_agreement = " << (agree ? "agree" : "disagree") << "\n";
  }
  os << "k,median_err,q10_err,q90_err,tail_prob,partial_sum,hoeffding_bound\n";
  for (std::size_t j = 0; j < report.checkpoints.size(); ++j) {
    const double hb = report.hoeffding.empty() ? 0.0 : std::min(1.0, report.hoeffding[j]);
    os << report.checkpoints[j] << "," << fmt17(report.median_err[j]) << ","
       << fmt17(report.q10_err[j]) << "," << fmt17(report.q90_err[j]) << ","
       << fmt17(report.tail_probs[j]) << "," << fmt17(report.partial_sums[j]) << "," << fmt17(hb)
       << "\n";
  }

  std::cout << "rm-study: wrote " << cfg.out << "; epsilon = " << fmt17(report.epsilon)
            << "; tail_prob(final) = " << fmt17(report.tail_probs.back())
            << "; rate_q = " << fmt17(report.rate_q);
  if (have_bounds) {
    std::cout << "; paper 2p = " << fmt17(two_p) << " (" << (agree ? "agree" : "disagree") << ")";
  }
  std::cout << "\n";
  return 0;
}

int cmd_bounds(const Overrides& ov) {
  const RunConfig cfg = load_config(ov);
  CNSystem sys;
  std::vector<double> rhs;
  Grid grid;
  first_step_system(cfg, sys, rhs, grid);

  const ProductNormTable table(sys.A, cfg.k_max, cfg.rm_gain);
  const Lemma1Fit fit = fit_lemma1(table);

  auto os = open_out(cfg.out);
  os << config_header(cfg, "bounds");
  os << "# lemma1_feasible = " << (fit.feasible ? 1 : 0) << "\n";
  if (!fit.feasible) {
    std::cerr << "bounds: no feasible decay exponent found on k <= " << cfg.k_max
              << "; the product-norm bound is falsified numerically for this matrix\n";
    return 3;
  }

  BoundParams bp;
  bp.gamma = fit.gamma;
  bp.p = fit.p;
  bp.C = fit_lemma2_constant(table, fit.gamma, fit.p);
  bp.noise_bound = cfg.noise_kind == NoiseKind::zero ? 0.0 : cfg.noise_b;
  bp.alpha = 8.0 * bp.C * (bp.gamma * bp.noise_bound) * (bp.gamma * bp.noise_bound);

  os << "# gamma = " << fmt17(bp.gamma) << "\n";
  os << "# p = " << fmt17(bp.p) << "\n";
  os << "# C = " << fmt17(bp.C) << "\n";
  os << "# alpha = " << fmt17(bp.alpha) << "\n";
  os << "# binding_pair = i:" << fit.arg_i << ",k:" << fit.arg_k << "\n";
  os << "k,max_ratio_over_i,sum,bound,holds\n";
  const double tol = 1.0 + 1e-12;
  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    double max_ratio = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      const double r = table.norm(i, k) *
                       std::pow(static_cast<double>(k + 1) / static_cast<double>(i + 1), bp.p);
      max_ratio = std::max(max_ratio, r);
    }
    const Lemma2Check l2 = lemma2_sum(table, k, bp);
    const bool holds = max_ratio <= bp.gamma * tol && l2.holds;
    os << k << "," << fmt17(max_ratio) << "," << fmt17(l2.sum) << "," << fmt17(l2.bound) << ","
       << (holds ? 1 : 0) << "\n";
  }

  std::cout << "bounds: wrote " << cfg.out << "; gamma = " << fmt17(bp.gamma)
            << ", p = " << fmt17(bp.p) << ", C = " << fmt17(bp.C)
            << ", alpha = " << fmt17(bp.alpha) << "\n";
  return 0;
}

int cmd_recursion_check(const Overrides& ov) {
  const RunConfig cfg = load_config(ov);
  CNSystem sys;
  std::vector<double> rhs;
  Grid grid;
  first_step_system(cfg, sys, rhs, grid);

  RMConfig rm = make_rm_config(cfg, grid.interior());
  rm.max_iters = cfg.recursion_k;
  rm.checkpoints.clear();
  rm.store_noise = true;
  const NoiseModel noise = make_noise(cfg, grid.interior());

  const RMResult res = rm_solve(sys.A, rhs, rm, noise);
  const double dev = error_recursion_check(sys.A, rm.x_init, rhs, res.trace.noise_draws,
                                           cfg.recursion_k, cfg.rm_gain);

  auto os = open_out(cfg.out);
  os << config_header(cfg, "recursion-check");
  os << "k,max_deviation\n";
  os << cfg.recursion_k << "," << fmt17(dev) << "\n";

  std::cout << "recursion-check: max_deviation = " << fmt17(dev) << " (k = " << cfg.recursion_k
            << ", n = " << grid.interior() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crank-Nicolson heat solver with a stochastic per-step iteration"};
  app.require_subcommand(1);

  Overrides ov;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ov.config_path, "path to key = value config file")->required();
    sub->add_option("--out", ov.out, "output CSV path (overrides config)");
    sub->add_option("--seed", ov.seed, "master seed (overrides config)");
    sub->add_option("--solver", ov.solver, "direct or rm (overrides config)");
  };

  CLI::App* solve = app.add_subcommand("solve", "march the heat equation, export the field");
  CLI::App* order = app.add_subcommand("order", "grid refinement study on the sine benchmark");
  CLI::App* study =
      app.add_subcommand("rm-study", "tail-probability ensemble study of the stochastic solver");
  CLI::App* bounds =
      app.add_subcommand("bounds", "fit and certify the product-norm and squared-sum bounds");
  CLI::App* recursion =
      app.add_subcommand("recursion-check", "verify the closed-form error recursion");
  for (CLI::App* sub : {solve, order, study, bounds, recursion}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(ov);
    if (order->parsed()) return cmd_order(ov);
    if (study->parsed()) return cmd_rm_study(ov);
    if (bounds->parsed()) return cmd_bounds(ov);
    if (recursion->parsed()) return cmd_recursion_check(ov);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
