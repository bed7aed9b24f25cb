#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cnrm/rng.hpp"
#include "cnrm/tridiag.hpp"

namespace cnrm {

enum class NoiseKind { zero, uniform };

/// Bounded i.i.d. noise on the right-hand side observation.
///
/// `uniform` draws each component from (-b/sqrt(n), +b/sqrt(n)), which has
/// zero mean and Euclidean norm strictly below b. `mean_shift` adds a
/// constant to every component; it exists to demonstrate that biased noise
/// drives the iteration to the wrong point and voids the norm bound.
struct NoiseModel {
  NoiseKind kind = NoiseKind::zero;
  double bound = 0.0;  // b
  std::size_t dim = 0;
  double mean_shift = 0.0;

  void validate() const;
};

std::vector<double> sample_noise(const NoiseModel& model, SplitMix64& rng);

/// Configuration of one stochastic solve.
///
/// The step at iteration k is gain/k, k = 1..max_iters; the initial iterate
/// is X_(1) = x_init and update k produces X_(k+1). A checkpoint value k
/// records the error of X_(k+1), i.e. the iterate after k updates.
struct RMConfig {
  std::size_t max_iters = 1000;
  double gain = 1.0;
  std::vector<double> x_init;
  std::uint64_t seed = 0;
  std::vector<std::size_t> checkpoints;  // strictly increasing, within [1, max_iters]
  double stop_residual = 0.0;            // > 0 enables early stop on ||A x - rhs||
  bool store_iterates = false;
  bool store_noise = false;

  void validate(std::size_t dim) const;
};

struct RMTrace {
  std::vector<std::size_t> checkpoints;          // checkpoints actually reached
  std::vector<double> err_norms;                 // ||X_(k+1) - X_ex||_2 per checkpoint
  std::vector<std::vector<double>> iterates;     // checkpoint iterates, if requested
  std::vector<std::vector<double>> noise_draws;  // xi_1..xi_K, if requested
  bool spectral_checked = false;
  bool spectral_ok = true;
  std::size_t stopped_at = 0;  // 0 means the full budget ran
};

struct RMResult {
  std::vector<double> x;
  RMTrace trace;
};

/// One update X_(k+1) = X_(k) - (gain/k) [A X_(k) - rhs - xi_k].
std::vector<double> rm_step(std::span<const double> x, std::size_t k, const TriDiag& A,
                            std::span<const double> rhs, std::span<const double> xi, double gain);

/// Run the full iteration against the direct solution of A x = rhs.
///
/// If A is symmetric the spectral condition min Re(eigenvalue) > 0 is
/// checked; a violation is recorded in the trace (warn-and-proceed), never
/// thrown. Identical (config, noise model) inputs produce bitwise-identical
/// results.
RMResult rm_solve(const TriDiag& A, std::span<const double> rhs, const RMConfig& cfg,
                  const NoiseModel& noise);

}  // namespace cnrm
