#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cnrm/robbins_monro.hpp"
#include "cnrm/tridiag.hpp"

namespace cnrm {

/// Constants of the exponential tail bound, fitted empirically.
///
/// alpha is 8*C*(gamma*b)^2 when derived from fitted constants.
struct BoundParams {
  double gamma = 0.0;
  double p = 0.0;
  double C = 0.0;
  double alpha = 0.0;
  double noise_bound = 0.0;  // b
  double epsilon = 0.0;
};

/// Max-norm deviation between the forward iterates of the stochastic
/// recursion and their closed-form reconstruction
///
///   X_(k+1) - X_ex =  prod_{i=1..k}(I - (c/i)A) (X_1 - X_ex)
///                   + sum_{i=1..k} prod_{j=i+1..k}(I - (c/j)A) (c/i) xi_i,
///
/// with the empty product equal to I. The right side is evaluated term by
/// term, independently of the forward sweep.
double error_recursion_check(const TriDiag& A, std::span<const double> x_init,
                             std::span<const double> rhs,
                             const std::vector<std::vector<double>>& noise_draws, std::size_t k,
                             double gain);

/// Spectral norm of prod_{j=i+1..k}(I - (gain/j)A) for symmetric A, computed
/// as the max over eigenvalues of |prod (1 - gain*lambda/j)|. i == k yields 1.
double product_norm(const TriDiag& A, std::size_t i, std::size_t k, double gain);

struct Lemma1Fit;

/// All product norms |prod_{j=i+1..k}(I - (gain/j^theta)A)| for
/// 0 <= i <= k <= k_max, precomputed in log space from the eigenvalues.
/// theta = 1 matches the iteration; other values are exploration only.
class ProductNormTable {
 public:
  ProductNormTable(const TriDiag& A, std::size_t k_max, double gain, double theta = 1.0);

  std::size_t k_max() const { return k_max_; }
  double gain() const { return gain_; }

  /// log |prod|; -infinity encodes an exactly zero product.
  double log_norm(std::size_t i, std::size_t k) const;
  double norm(std::size_t i, std::size_t k) const;

 private:
  friend Lemma1Fit fit_lemma1(const ProductNormTable& table);

  std::size_t index(std::size_t i, std::size_t k) const;

  std::size_t k_max_;
  double gain_;
  std::vector<double> log_norms_;  // row k holds entries i = 0..k
  std::vector<double> log_idx_;    // log(j+1) for j = 0..k_max
};

/// Empirical certificate of the product-norm bound
/// |prod_{j=i+1..k}(I - (c/j)A)| <= gamma ((i+1)/(k+1))^p, 1 <= i <= k <= k_max.
///
/// The largest grid p is chosen for which the minimal gamma fitted on the
/// half range k <= k_max/2 still covers the full range; a bound whose
/// constant keeps growing with k (no spectral decay, e.g. A = -I) is
/// reported infeasible.
struct Lemma1Fit {
  bool feasible = false;
  double gamma = 0.0;
  double p = 0.0;
  std::size_t k_max = 0;
  double gain = 1.0;
  std::size_t arg_i = 0;  // pair attaining the fitted gamma
  std::size_t arg_k = 0;
};

Lemma1Fit fit_lemma1(const ProductNormTable& table);
Lemma1Fit fit_lemma1(const TriDiag& A, std::size_t k_max, double gain);

/// One row of the squared-sum bound
/// sum_{i=1..k} (|prod_{j=i+1..k}(I-(c/j)A)| * c/i)^2 <= C gamma^2 / (k+1)^{2p}.
struct Lemma2Check {
  double sum = 0.0;
  double bound = 0.0;
  bool holds = false;
};

Lemma2Check lemma2_sum(const ProductNormTable& table, std::size_t k, const BoundParams& params);
Lemma2Check lemma2_sum(const TriDiag& A, std::size_t k, double gain, const BoundParams& params);

/// Smallest constant C making the squared-sum bound hold for every
/// k <= table.k_max() with the given (gamma, p).
double fit_lemma2_constant(const ProductNormTable& table, double gamma, double p);

/// Tail bound 2 exp(-(k+1)^{2p} eps^2 / alpha). Values above 1 are vacuous
/// but returned unclamped.
double hoeffding_bound(double epsilon, std::size_t k, double alpha, double p);

/// Ensemble study of almost-complete convergence.
struct StudyReport {
  std::vector<std::size_t> checkpoints;
  std::vector<double> median_err;
  std::vector<double> q10_err;
  std::vector<double> q90_err;
  std::vector<double> tail_probs;     // P(||X_(k+1) - X_ex|| > epsilon), empirical
  std::vector<double> partial_sums;   // running sum of tail_probs
  std::vector<double> hoeffding;      // bound curve, empty without BoundParams
  double epsilon = 0.0;               // threshold actually used
  double noise_floor = 0.0;           // pilot median at the last checkpoint (NaN if not measured)
  std::size_t det_below_half_eps_at = 0;  // first checkpoint with deterministic term <= eps/2
  double rate_q = 0.0;                // fitted decay exponent (NaN if the fit failed)
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  bool spectral_ok = true;
};

/// Run `replications` independent solves (streams derived from cfg.seed) and
/// aggregate tail probabilities at cfg.checkpoints. epsilon <= 0 selects
/// 3x the noise floor measured by a 10-replication pilot. `bounds`, when
/// given, fills the hoeffding curve.
StudyReport aco_study(const TriDiag& A, std::span<const double> rhs, const RMConfig& cfg,
                      const NoiseModel& noise, double epsilon, std::size_t replications,
                      const BoundParams* bounds = nullptr);

/// Least-squares slope of log(median error) against log(k), negated.
/// Nonpositive medians are dropped; fewer than 3 usable points throws.
double rate_fit(std::span<const double> median_errs, std::span<const std::size_t> checkpoints);

}  // namespace cnrm
