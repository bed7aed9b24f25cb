#include "cnrm/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cnrm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Apply v <- (I - (gain/j) A) v in place.
void apply_factor(const TriDiag& A, double gain, std::size_t j, std::vector<double>& v,
                  std::vector<double>& scratch) {
  const std::size_t n = A.size();
  const double step = gain / static_cast<double>(j);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = A.diag[i] * v[i];
    if (i > 0) acc += A.sub[i - 1] * v[i - 1];
    if (i + 1 < n) acc += A.sup[i] * v[i + 1];
    scratch[i] = v[i] - step * acc;
  }
  v.swap(scratch);
}

void run_parallel(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(hw == 0 ? 1 : hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Linear-interpolation quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double error_recursion_check(const TriDiag& A, std::span<const double> x_init,
                             std::span<const double> rhs,
                             const std::vector<std::vector<double>>& noise_draws, std::size_t k,
                             double gain) {
  const std::size_t n = A.size();
  if (x_init.size() != n || rhs.size() != n) {
    throw std::invalid_argument("error_recursion_check: dimension mismatch");
  }
  if (noise_draws.size() < k) {
    throw std::invalid_argument("error_recursion_check: not enough recorded noise draws");
  }
  const std::vector<double> x_ex = thomas_solve(A, rhs);

  // Forward sweep: X_(k+1) by k applications of the update.
  std::vector<double> x(x_init.begin(), x_init.end());
  for (std::size_t kk = 1; kk <= k; ++kk) {
    x = rm_step(x, kk, A, rhs, noise_draws[kk - 1], gain);
  }

  // Closed-form side, term by term.
  std::vector<double> scratch(n);
  std::vector<double> lhs_det(n);
  for (std::size_t i = 0; i < n; ++i) lhs_det[i] = x_init[i] - x_ex[i];
  for (std::size_t j = 1; j <= k; ++j) apply_factor(A, gain, j, lhs_det, scratch);

  std::vector<double> reconstructed = lhs_det;
  std::vector<double> term(n);
  for (std::size_t i = 1; i <= k; ++i) {
    const double ci = gain / static_cast<double>(i);
    for (std::size_t q = 0; q < n; ++q) term[q] = ci * noise_draws[i - 1][q];
    for (std::size_t j = i + 1; j <= k; ++j) apply_factor(A, gain, j, term, scratch);
    for (std::size_t q = 0; q < n; ++q) reconstructed[q] += term[q];
  }

  double dev = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    dev = std::max(dev, std::abs((x[q] - x_ex[q]) - reconstructed[q]));
  }
  return dev;
}

double product_norm(const TriDiag& A, std::size_t i, std::size_t k, double gain) {
  if (!A.symmetric()) {
    throw std::invalid_argument("product_norm: only symmetric matrices are supported");
  }
  if (i > k) throw std::invalid_argument("product_norm: need i <= k");
  if (i == k) return 1.0;
  const Spectrum s = spectrum(A);
  double best = 0.0;
  for (double lambda : s.eigenvalues) {
    double prod = 1.0;
    for (std::size_t j = i + 1; j <= k; ++j) {
      prod *= 1.0 - gain * lambda / static_cast<double>(j);
    }
    best = std::max(best, std::abs(prod));
  }
  return best;
}

std::size_t ProductNormTable::index(std::size_t i, std::size_t k) const {
  return k * (k + 1) / 2 - 1 + i;
}

ProductNormTable::ProductNormTable(const TriDiag& A, std::size_t k_max, double gain, double theta)
    : k_max_(k_max), gain_(gain) {
  if (k_max == 0) throw std::invalid_argument("ProductNormTable: k_max must be positive");
  if (!(gain > 0.0)) throw std::invalid_argument("ProductNormTable: gain must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("ProductNormTable: theta must be positive");
  const Spectrum s = spectrum(A);
  const std::size_t ne = s.eigenvalues.size();

  // Per-eigenvalue prefix sums of log|1 - (gain/j^theta) lambda| plus a
  // zero-factor count, so |prod_(i,k]| = exp(S(k) - S(i)) unless a zero
  // factor falls inside the window.
  std::vector<std::vector<double>> logs(ne, std::vector<double>(k_max + 1, 0.0));
  std::vector<std::vector<std::uint32_t>> zeros(ne,
                                                std::vector<std::uint32_t>(k_max + 1, 0));
  for (std::size_t e = 0; e < ne; ++e) {
    const double lambda = s.eigenvalues[e];
    for (std::size_t j = 1; j <= k_max; ++j) {
      const double f = 1.0 - gain * lambda / std::pow(static_cast<double>(j), theta);
      logs[e][j] = logs[e][j - 1] + (f == 0.0 ? 0.0 : std::log(std::abs(f)));
      zeros[e][j] = zeros[e][j - 1] + (f == 0.0 ? 1u : 0u);
    }
  }

  log_norms_.assign(k_max * (k_max + 3) / 2, kNegInf);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double* row = log_norms_.data() + index(0, k);
    for (std::size_t i = 0; i <= k; ++i) {
      double best = kNegInf;
      for (std::size_t e = 0; e < ne; ++e) {
        if (zeros[e][k] != zeros[e][i]) continue;
        best = std::max(best, logs[e][k] - logs[e][i]);
      }
      row[i] = best;
    }
  }

  log_idx_.resize(k_max + 1);
  for (std::size_t j = 0; j <= k_max; ++j) log_idx_[j] = std::log(static_cast<double>(j + 1));
}

double ProductNormTable::log_norm(std::size_t i, std::size_t k) const {
  if (i > k || k > k_max_) throw std::invalid_argument("ProductNormTable: indices out of range");
  if (i == k) return 0.0;
  return log_norms_[index(i, k)];
}

double ProductNormTable::norm(std::size_t i, std::size_t k) const {
  const double l = log_norm(i, k);
  return l == kNegInf ? 0.0 : std::exp(l);
}

Lemma1Fit fit_lemma1(const ProductNormTable& table) {
  const std::size_t k_max = table.k_max_;
  if (k_max < 4) throw std::invalid_argument("fit_lemma1: need k_max >= 4");
  const std::size_t quarter = k_max / 4;
  const std::size_t half = k_max / 2;

  Lemma1Fit fit;
  fit.k_max = k_max;
  fit.gain = table.gain_;

  // An exponent is certified only if the per-k worst ratio stops growing:
  // its max over the last half of the range must not exceed the max over
  // the preceding quarter. Products that decay slower than p (or grow, as
  // for a matrix violating the spectral condition) fail this for every p.
  for (int step = 80; step >= 1; --step) {
    const double p = static_cast<double>(step) / 20.0;
    double max_mid = kNegInf;
    double max_tail = kNegInf;
    double max_full = kNegInf;
    std::size_t arg_i = 0, arg_k = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const double* row = table.log_norms_.data() + table.index(0, k);
      const double log_k1 = table.log_idx_[k];
      double row_max = kNegInf;
      std::size_t row_arg = 1;
      for (std::size_t i = 1; i <= k; ++i) {
        const double v = row[i] + p * (log_k1 - table.log_idx_[i]);
        if (v > row_max) {
          row_max = v;
          row_arg = i;
        }
      }
      if (k > quarter && k <= half) max_mid = std::max(max_mid, row_max);
      if (k > half) max_tail = std::max(max_tail, row_max);
      if (row_max > max_full) {
        max_full = row_max;
        arg_i = row_arg;
        arg_k = k;
      }
    }
    if (max_tail <= max_mid + 1e-9) {
      fit.feasible = true;
      fit.p = p;
      fit.gamma = std::exp(max_full);
      fit.arg_i = arg_i;
      fit.arg_k = arg_k;
      return fit;
    }
  }
  return fit;
}

Lemma1Fit fit_lemma1(const TriDiag& A, std::size_t k_max, double gain) {
  return fit_lemma1(ProductNormTable(A, k_max, gain));
}

Lemma2Check lemma2_sum(const ProductNormTable& table, std::size_t k, const BoundParams& params) {
  if (k < 1 || k > table.k_max()) throw std::invalid_argument("lemma2_sum: k out of range");
  Lemma2Check out;
  const double c = table.gain();
  for (std::size_t i = 1; i <= k; ++i) {
    const double w = table.norm(i, k) * c / static_cast<double>(i);
    out.sum += w * w;
  }
  out.bound = params.C * params.gamma * params.gamma /
              std::pow(static_cast<double>(k + 1), 2.0 * params.p);
  out.holds = out.sum <= out.bound * (1.0 + 1e-12);
  return out;
}

Lemma2Check lemma2_sum(const TriDiag& A, std::size_t k, double gain, const BoundParams& params) {
  if (k < 1) throw std::invalid_argument("lemma2_sum: k must be at least 1");
  const Spectrum s = spectrum(A);
  const std::size_t ne = s.eigenvalues.size();
  // Backward recurrence per eigenvalue: P(i-1,k) = f_i * P(i,k).
  std::vector<double> prods(ne, 1.0);
  std::vector<double> norms(k + 1, 0.0);
  norms[k] = 1.0;
  for (std::size_t i = k; i-- > 1;) {
    double best = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
      const double f = 1.0 - gain * s.eigenvalues[e] / static_cast<double>(i + 1);
      prods[e] *= f;
      best = std::max(best, std::abs(prods[e]));
    }
    norms[i] = best;
  }
  Lemma2Check out;
  for (std::size_t i = 1; i <= k; ++i) {
    const double w = norms[i] * gain / static_cast<double>(i);
    out.sum += w * w;
  }
  out.bound = params.C * params.gamma * params.gamma /
              std::pow(static_cast<double>(k + 1), 2.0 * params.p);
  out.holds = out.sum <= out.bound * (1.0 + 1e-12);
  return out;
}

double fit_lemma2_constant(const ProductNormTable& table, double gamma, double p) {
  if (!(gamma > 0.0)) throw std::invalid_argument("fit_lemma2_constant: gamma must be positive");
  double C = 0.0;
  const double c = table.gain();
  for (std::size_t k = 1; k <= table.k_max(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      const double w = table.norm(i, k) * c / static_cast<double>(i);
      sum += w * w;
    }
    const double candidate =
        sum * std::pow(static_cast<double>(k + 1), 2.0 * p) / (gamma * gamma);
    C = std::max(C, candidate);
  }
  return C;
}

double hoeffding_bound(double epsilon, std::size_t k, double alpha, double p) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("hoeffding_bound: epsilon must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("hoeffding_bound: alpha must be positive");
  if (!(p > 0.0)) throw std::invalid_argument("hoeffding_bound: p must be positive");
  if (k < 1) throw std::invalid_argument("hoeffding_bound: k must be at least 1");
  const double growth = std::pow(static_cast<double>(k + 1), 2.0 * p);
  return 2.0 * std::exp(-growth * epsilon * epsilon / alpha);
}

StudyReport aco_study(const TriDiag& A, std::span<const double> rhs, const RMConfig& cfg,
                      const NoiseModel& noise, double epsilon, std::size_t replications,
                      const BoundParams* bounds) {
  const std::size_t n = A.size();
  cfg.validate(n);
  noise.validate();
  if (replications < 2) throw std::invalid_argument("aco_study: need at least 2 replications");
  if (cfg.checkpoints.empty()) throw std::invalid_argument("aco_study: checkpoints required");

  StudyReport report;
  report.checkpoints = cfg.checkpoints;
  report.replications = replications;
  report.seed = cfg.seed;
  report.noise_floor = std::numeric_limits<double>::quiet_NaN();

  auto run_replication = [&](std::uint64_t stream_seed) {
    RMConfig local = cfg;
    local.seed = stream_seed;
    local.store_iterates = false;
    local.store_noise = false;
    return rm_solve(A, rhs, local, noise);
  };

  // Pilot run to place epsilon above the measured noise floor.
  if (!(epsilon > 0.0)) {
    constexpr std::size_t kPilotReps = 10;
    const std::uint64_t pilot_master = derive_stream(cfg.seed, 0x70696c6f74ULL);
    std::vector<double> final_errs(kPilotReps, 0.0);
    run_parallel(kPilotReps, [&](std::size_t r) {
      const RMResult res = run_replication(derive_stream(pilot_master, r));
      final_errs[r] = res.trace.err_norms.empty() ? 0.0 : res.trace.err_norms.back();
    });
    std::sort(final_errs.begin(), final_errs.end());
    report.noise_floor = quantile_sorted(final_errs, 0.5);
    epsilon = 3.0 * report.noise_floor;
  }
  report.epsilon = epsilon;

  const std::size_t ncp = cfg.checkpoints.size();
  std::vector<std::vector<double>> curves(replications);
  std::atomic<bool> spectral_ok{true};
  run_parallel(replications, [&](std::size_t r) {
    const RMResult res = run_replication(derive_stream(cfg.seed, r));
    if (res.trace.spectral_checked && !res.trace.spectral_ok) spectral_ok = false;
    curves[r] = res.trace.err_norms;
  });
  report.spectral_ok = spectral_ok;

  report.median_err.resize(ncp);
  report.q10_err.resize(ncp);
  report.q90_err.resize(ncp);
  report.tail_probs.resize(ncp);
  report.partial_sums.resize(ncp);
  std::vector<double> column(replications);
  double running = 0.0;
  for (std::size_t j = 0; j < ncp; ++j) {
    std::size_t exceed = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      column[r] = curves[r][j];
      if (column[r] > epsilon) ++exceed;
    }
    std::sort(column.begin(), column.end());
    report.median_err[j] = quantile_sorted(column, 0.5);
    report.q10_err[j] = quantile_sorted(column, 0.1);
    report.q90_err[j] = quantile_sorted(column, 0.9);
    report.tail_probs[j] = static_cast<double>(exceed) / static_cast<double>(replications);
    running += report.tail_probs[j];
    report.partial_sums[j] = running;
  }

  if (bounds != nullptr && bounds->alpha > 0.0 && bounds->p > 0.0) {
    report.hoeffding.resize(ncp);
    for (std::size_t j = 0; j < ncp; ++j) {
      report.hoeffding[j] = hoeffding_bound(epsilon, cfg.checkpoints[j], bounds->alpha, bounds->p);
    }
  }

  // Deterministic product term against eps/2 (the absorption step of the
  // tail-bound proof): first checkpoint where it has dropped below.
  {
    RMConfig det = cfg;
    det.store_iterates = false;
    det.store_noise = false;
    const NoiseModel silent{NoiseKind::zero, 0.0, n, 0.0};
    const RMResult res = rm_solve(A, rhs, det, silent);
    for (std::size_t j = 0; j < res.trace.err_norms.size(); ++j) {
      if (res.trace.err_norms[j] <= 0.5 * epsilon) {
        report.det_below_half_eps_at = res.trace.checkpoints[j];
        break;
      }
    }
  }

  try {
    report.rate_q = rate_fit(report.median_err, report.checkpoints);
  } catch (const std::invalid_argument&) {
    report.rate_q = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double rate_fit(std::span<const double> median_errs, std::span<const std::size_t> checkpoints) {
  if (median_errs.size() != checkpoints.size()) {
    throw std::invalid_argument("rate_fit: medians and checkpoints differ in length");
  }
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < median_errs.size(); ++j) {
    if (median_errs[j] > 0.0 && std::isfinite(median_errs[j])) {
      xs.push_back(std::log(static_cast<double>(checkpoints[j])));
      ys.push_back(std::log(median_errs[j]));
    }
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("rate_fit: need at least 3 positive medians");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    mx += xs[j];
    my += ys[j];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxy += (xs[j] - mx) * (ys[j] - my);
    sxx += (xs[j] - mx) * (xs[j] - mx);
  }
  return -sxy / sxx;
}

}  // namespace cnrm
