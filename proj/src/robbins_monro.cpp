#include "cnrm/robbins_monro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cnrm {

void NoiseModel::validate() const {
  if (kind != NoiseKind::zero && !(bound > 0.0)) {
    throw std::invalid_argument("NoiseModel: bound must be positive unless kind is zero");
  }
  if (dim == 0) {
    throw std::invalid_argument("NoiseModel: dimension must be positive");
  }
}

std::vector<double> sample_noise(const NoiseModel& model, SplitMix64& rng) {
  model.validate();
  std::vector<double> xi(model.dim, model.mean_shift);
  if (model.kind == NoiseKind::zero) return xi;
  const double scale = model.bound / std::sqrt(static_cast<double>(model.dim));
  for (double& c : xi) {
    c += (2.0 * rng.next_open_unit() - 1.0) * scale;
  }
  return xi;
}

void RMConfig::validate(std::size_t dim) const {
  if (max_iters == 0) throw std::invalid_argument("RMConfig: max_iters must be positive");
  if (!(gain > 0.0)) throw std::invalid_argument("RMConfig: gain must be positive");
  if (x_init.size() != dim) {
    throw std::invalid_argument("RMConfig: x_init length does not match system dimension");
  }
  std::size_t prev = 0;
  for (std::size_t c : checkpoints) {
    if (c < 1 || c > max_iters || c <= prev) {
      throw std::invalid_argument(
          "RMConfig: checkpoints must be strictly increasing within [1, max_iters]");
    }
    prev = c;
  }
}

std::vector<double> rm_step(std::span<const double> x, std::size_t k, const TriDiag& A,
                            std::span<const double> rhs, std::span<const double> xi, double gain) {
  if (k < 1) throw std::invalid_argument("rm_step: iteration index starts at 1");
  if (x.size() != A.size() || rhs.size() != A.size() || xi.size() != A.size()) {
    throw std::invalid_argument("rm_step: dimension mismatch");
  }
  std::vector<double> y = matvec(A, x);
  const double step = gain / static_cast<double>(k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = x[i] - step * (y[i] - rhs[i] - xi[i]);
  }
  return y;
}

RMResult rm_solve(const TriDiag& A, std::span<const double> rhs, const RMConfig& cfg,
                  const NoiseModel& noise) {
  const std::size_t n = A.size();
  if (rhs.size() != n) throw std::invalid_argument("rm_solve: rhs length mismatch");
  cfg.validate(n);
  if (noise.dim != n) throw std::invalid_argument("rm_solve: noise dimension mismatch");

  RMResult out;
  out.trace.checkpoints.reserve(cfg.checkpoints.size());
  out.trace.err_norms.reserve(cfg.checkpoints.size());

  if (A.symmetric()) {
    out.trace.spectral_checked = true;
    out.trace.spectral_ok = spectrum(A).min_real > 0.0;
  }

  const std::vector<double> x_ex = thomas_solve(A, rhs);
  std::vector<double> x = cfg.x_init;
  std::vector<double> resid(n);
  SplitMix64 rng(cfg.seed);
  const bool noisy = noise.kind != NoiseKind::zero || noise.mean_shift != 0.0;
  std::vector<double> xi(n, 0.0);

  auto err_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - x_ex[i];
      s += d * d;
    }
    return std::sqrt(s);
  };

  std::size_t next_cp = 0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    // Residual A x_k - rhs, reused for the optional stopping rule.
    for (std::size_t i = 0; i < n; ++i) {
      double acc = A.diag[i] * x[i];
      if (i > 0) acc += A.sub[i - 1] * x[i - 1];
      if (i + 1 < n) acc += A.sup[i] * x[i + 1];
      resid[i] = acc - rhs[i];
    }
    if (cfg.stop_residual > 0.0) {
      double s = 0.0;
      for (double r : resid) s += r * r;
      if (std::sqrt(s) <= cfg.stop_residual) {
        out.trace.stopped_at = k;
        break;
      }
    }
    if (noisy) {
      xi = sample_noise(noise, rng);
    }
    const double step = cfg.gain / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] -= step * (resid[i] - xi[i]);
    }
    if (cfg.store_noise) out.trace.noise_draws.push_back(xi);
    if (next_cp < cfg.checkpoints.size() && cfg.checkpoints[next_cp] == k) {
      out.trace.checkpoints.push_back(k);
      out.trace.err_norms.push_back(err_norm());
      if (cfg.store_iterates) out.trace.iterates.push_back(x);
      ++next_cp;
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace cnrm
