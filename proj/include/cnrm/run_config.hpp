#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnrm/crank_nicolson.hpp"
#include "cnrm/robbins_monro.hpp"
#include "cnrm/stepper.hpp"

namespace cnrm {

/// Parse or validation failure; the message carries origin and line number
/// for syntax errors.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IcKind { sine, constant };
enum class BcKind { zero, constant };

/// Full run configuration, loaded from a flat `key = value` file with `#`
/// comments. Unknown and duplicate keys are rejected. The canonical echo()
/// text serializes every field with 17 significant digits and is what gets
/// hashed into output headers.
struct RunConfig {
  // problem
  double D = 1.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  IcKind ic = IcKind::sine;
  double ic_value = 1.0;
  BcKind bc_lo = BcKind::zero;
  double bc_lo_value = 0.0;
  BcKind bc_hi = BcKind::zero;
  double bc_hi_value = 0.0;
  // grid
  std::size_t N = 10;
  std::size_t M = 100;
  double t_end = 1.0;
  // solver
  SolverKind solver = SolverKind::direct;
  // rm
  std::size_t rm_iters = 100000;
  double rm_gain = 1.0;
  NoiseKind noise_kind = NoiseKind::uniform;
  double noise_b = 0.1;
  double noise_mean_shift = 0.0;
  // study
  double epsilon = 0.0;  // 0 selects 3x the pilot noise floor
  std::size_t replications = 200;
  std::vector<std::size_t> checkpoints = {100,   316,   1000,  3162, 10000,
                                          31623, 50000, 70000, 100000};
  std::size_t k_max = 2000;
  std::size_t levels = 4;
  std::size_t recursion_k = 100;
  double bound_p = 0.0;      // 0 means fit from the product-norm certificate
  double bound_alpha = 0.0;  // 0 means derive 8*C*(gamma*b)^2 from the fit
  // reproducibility
  std::uint64_t seed = 1;
  std::string out = "out.csv";

  void validate() const;
  std::string echo() const;       // canonical key = value text
  std::uint64_t config_hash() const;  // FNV-1a of echo()
};

RunConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");
RunConfig parse_config_file(const std::string& path);

/// The '#'-prefixed header block embedded at the top of every CSV artifact:
/// command, config hash, seed and the full effective config between
/// `config begin` / `config end` markers.
std::string config_header(const RunConfig& cfg, std::string_view command);

/// Recover the effective config from a CSV produced with config_header().
RunConfig extract_embedded_config(std::string_view csv_text);

HeatProblem make_problem(const RunConfig& cfg);
bool analytic_available(const RunConfig& cfg);
NoiseModel make_noise(const RunConfig& cfg, std::size_t dim);
RMConfig make_rm_config(const RunConfig& cfg, std::size_t dim);

}  // namespace cnrm
