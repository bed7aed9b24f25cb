#include <doctest.h>

#include <cmath>

#include "cnrm/crank_nicolson.hpp"
#include "cnrm/robbins_monro.hpp"
#include "oracles.hpp"

using namespace cnrm;

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

TEST_CASE("sample_noise: zero model returns zeros and consumes no stream") {
  SplitMix64 rng(5);
  const NoiseModel m{NoiseKind::zero, 0.0, 3, 0.0};
  CHECK(sample_noise(m, rng) == std::vector<double>{0.0, 0.0, 0.0});
  SplitMix64 fresh(5);
  CHECK(rng.next_u64() == fresh.next_u64());
}

TEST_CASE("sample_noise: same seed and draw index give the same vector") {
  const NoiseModel m{NoiseKind::uniform, 0.5, 4, 0.0};
  SplitMix64 a(99), b(99);
  for (int i = 0; i < 10; ++i) {
    CHECK(sample_noise(m, a) == sample_noise(m, b));
  }
}

TEST_CASE("sample_noise: strict norm bound and zero mean over many draws") {
  const NoiseModel m{NoiseKind::uniform, 0.1, 4, 0.0};
  SplitMix64 rng(2024);
  const std::size_t draws = 100000;
  std::vector<double> mean(4, 0.0);
  double max_norm = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto xi = sample_noise(m, rng);
    max_norm = std::max(max_norm, norm2(xi));
    for (std::size_t i = 0; i < 4; ++i) mean[i] += xi[i];
  }
  CHECK(max_norm < 0.1);
  // Component variance is b^2/(3n); the sample mean must sit within 3 sigma.
  const double sigma_mean = 0.1 / std::sqrt(3.0 * 4.0 * static_cast<double>(draws));
  for (double mu : mean) {
    CHECK(std::abs(mu / static_cast<double>(draws)) <= 3.0 * sigma_mean);
  }
}

TEST_CASE("sample_noise: mean shift moves the sample mean") {
  const NoiseModel m{NoiseKind::uniform, 0.1, 2, 0.25};
  SplitMix64 rng(77);
  double mu = 0.0;
  const std::size_t draws = 20000;
  for (std::size_t d = 0; d < draws; ++d) {
    for (double c : sample_noise(m, rng)) mu += c;
  }
  mu /= static_cast<double>(2 * draws);
  CHECK(mu == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("rm_step: identity, k=1 lands on rhs + noise") {
  const TriDiag eye = TriDiag::identity(2);
  const auto x = rm_step(std::vector<double>{0.0, 0.0}, 1, eye, std::vector<double>{1.0, 2.0},
                         std::vector<double>{0.0, 0.0}, 1.0);
  CHECK(x == std::vector<double>{1.0, 2.0});
}

TEST_CASE("rm_step: direct substitution at k=2 with noise") {
  const TriDiag eye = TriDiag::identity(2);
  const auto x = rm_step(std::vector<double>{1.0, 2.0}, 2, eye, std::vector<double>{1.0, 2.0},
                         std::vector<double>{0.1, -0.1}, 1.0);
  CHECK(x[0] == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.95).epsilon(1e-15));
}

TEST_CASE("rm_step: stencil matrix update against the dense oracle") {
  const CNSystem sys = cn_system(1.0, 4);
  const std::vector<double> x{0.0, 0.0, 0.0};
  const std::vector<double> rhs{1.0, 0.0, 0.0};
  const std::vector<double> xi{0.0, 0.0, 0.0};
  const auto next = rm_step(x, 1, sys.A, rhs, xi, 1.0);
  CHECK(next == std::vector<double>{1.0, 0.0, 0.0});
  // Same update built densely: x - (A x - rhs).
  const auto ax = oracle::dense_matvec(sys.A, x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(next[i] == doctest::Approx(x[i] - (ax[i] - rhs[i])).epsilon(1e-15));
  }
}

TEST_CASE("rm_step rejects bad dimensions and k = 0") {
  const TriDiag eye = TriDiag::identity(2);
  const std::vector<double> v2{0.0, 0.0};
  CHECK_THROWS_AS(rm_step(std::vector<double>{0.0}, 1, eye, v2, v2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rm_step(v2, 0, eye, v2, v2, 1.0), std::invalid_argument);
}

TEST_CASE("rm_solve: one exact step on the identity") {
  RMConfig cfg;
  cfg.max_iters = 1;
  cfg.x_init = {0.0, 0.0};
  cfg.checkpoints = {1};
  const NoiseModel silent{NoiseKind::zero, 0.0, 2, 0.0};
  const auto res = rm_solve(TriDiag::identity(2), std::vector<double>{3.0, 4.0}, cfg, silent);
  CHECK(res.x == std::vector<double>{3.0, 4.0});
  REQUIRE(res.trace.err_norms.size() == 1);
  CHECK(res.trace.err_norms[0] == 0.0);
}

TEST_CASE("rm_solve: fixed point is preserved exactly") {
  const TriDiag eye = TriDiag::identity(2);
  RMConfig cfg;
  cfg.max_iters = 25;
  cfg.x_init = {1.0, 2.0};
  cfg.checkpoints = {25};
  const NoiseModel silent{NoiseKind::zero, 0.0, 2, 0.0};
  const auto res = rm_solve(eye, std::vector<double>{1.0, 2.0}, cfg, silent);
  CHECK(res.x == std::vector<double>{1.0, 2.0});
  CHECK(res.trace.err_norms[0] == 0.0);
}

TEST_CASE("rm_solve: noise-free error follows the matrix product form") {
  const CNSystem sys = cn_system(1.0, 10);
  const std::size_t n = sys.A.size();
  std::vector<double> rhs(n, 0.0);
  rhs[0] = 1.0;
  rhs[n - 1] = -0.5;
  RMConfig cfg;
  cfg.max_iters = 50;
  cfg.x_init.assign(n, 0.0);
  const NoiseModel silent{NoiseKind::zero, 0.0, n, 0.0};
  const auto res = rm_solve(sys.A, rhs, cfg, silent);

  const auto x_ex = thomas_solve(sys.A, rhs);
  // Dense evaluation of prod_{i=1..K}(I - A/i) (x_init - x_ex).
  const Eigen::MatrixXd a = oracle::dense(sys.A);
  Eigen::VectorXd err = oracle::to_eigen(sub(cfg.x_init, x_ex));
  for (std::size_t i = 1; i <= cfg.max_iters; ++i) {
    err = err - (1.0 / static_cast<double>(i)) * (a * err);
  }
  const auto fwd = sub(res.x, x_ex);
  for (std::size_t q = 0; q < n; ++q) {
    CHECK(std::abs(fwd[q] - err(static_cast<Eigen::Index>(q))) <= 1e-10);
  }
}

TEST_CASE("rm_solve: identical seeds give bitwise-identical traces") {
  const CNSystem sys = cn_system(1.0, 10);
  const std::size_t n = sys.A.size();
  std::vector<double> rhs(n, 0.25);
  RMConfig cfg;
  cfg.max_iters = 500;
  cfg.x_init.assign(n, 0.0);
  cfg.seed = 31337;
  cfg.checkpoints = {1, 10, 100, 500};
  cfg.store_noise = true;
  const NoiseModel noisy{NoiseKind::uniform, 0.1, n, 0.0};
  const auto r1 = rm_solve(sys.A, rhs, cfg, noisy);
  const auto r2 = rm_solve(sys.A, rhs, cfg, noisy);
  CHECK(r1.x == r2.x);
  CHECK(r1.trace.err_norms == r2.trace.err_norms);
  CHECK(r1.trace.noise_draws == r2.trace.noise_draws);
}

TEST_CASE("rm_solve: noise-free convergence on the stencil system") {
  const CNSystem sys = cn_system(1.0, 10);
  const std::size_t n = sys.A.size();
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = std::sin(0.3 * static_cast<double>(i + 1));
  RMConfig cfg;
  cfg.max_iters = 100000;
  cfg.x_init.assign(n, 0.0);
  const NoiseModel silent{NoiseKind::zero, 0.0, n, 0.0};
  const auto res = rm_solve(sys.A, rhs, cfg, silent);
  const auto x_ex = thomas_solve(sys.A, rhs);
  const double err0 = norm2(sub(cfg.x_init, x_ex));
  CHECK(norm2(sub(res.x, x_ex)) <= 1e-4 * err0);
}

TEST_CASE("rm_solve: spectral condition violation is a warning, not an error") {
  const TriDiag neg = TriDiag::constant(3, -1.0, 0.0);
  RMConfig cfg;
  cfg.max_iters = 3;
  cfg.x_init = {0.0, 0.0, 0.0};
  const NoiseModel silent{NoiseKind::zero, 0.0, 3, 0.0};
  const auto res = rm_solve(neg, std::vector<double>{1.0, 1.0, 1.0}, cfg, silent);
  CHECK(res.trace.spectral_checked);
  CHECK_FALSE(res.trace.spectral_ok);
}

TEST_CASE("rm_solve: optional residual stop halts immediately at the solution") {
  const TriDiag eye = TriDiag::identity(2);
  RMConfig cfg;
  cfg.max_iters = 100;
  cfg.x_init = {1.0, 2.0};
  cfg.stop_residual = 1e-9;
  const NoiseModel silent{NoiseKind::zero, 0.0, 2, 0.0};
  const auto res = rm_solve(eye, std::vector<double>{1.0, 2.0}, cfg, silent);
  CHECK(res.trace.stopped_at == 1);
  CHECK(res.x == std::vector<double>{1.0, 2.0});
}

TEST_CASE("rm_solve: biased noise converges to the wrong point") {
  const TriDiag eye = TriDiag::identity(2);
  RMConfig cfg;
  cfg.max_iters = 200000;
  cfg.x_init = {0.0, 0.0};
  cfg.seed = 7;
  // Mean shift delta makes the stationary point x_ex + A^{-1} delta.
  const NoiseModel biased{NoiseKind::uniform, 0.1, 2, 0.5};
  const auto res = rm_solve(eye, std::vector<double>{1.0, 1.0}, cfg, biased);
  CHECK(res.x[0] == doctest::Approx(1.5).epsilon(0.02));
  CHECK(res.x[1] == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("rm_solve validates checkpoints and dimensions") {
  const TriDiag eye = TriDiag::identity(2);
  const NoiseModel silent{NoiseKind::zero, 0.0, 2, 0.0};
  RMConfig cfg;
  cfg.max_iters = 10;
  cfg.x_init = {0.0, 0.0};
  cfg.checkpoints = {5, 3};
  CHECK_THROWS_AS(rm_solve(eye, std::vector<double>{1.0, 1.0}, cfg, silent),
                  std::invalid_argument);
  cfg.checkpoints = {11};
  CHECK_THROWS_AS(rm_solve(eye, std::vector<double>{1.0, 1.0}, cfg, silent),
                  std::invalid_argument);
  cfg.checkpoints = {5};
  cfg.x_init = {0.0};
  CHECK_THROWS_AS(rm_solve(eye, std::vector<double>{1.0, 1.0}, cfg, silent),
                  std::invalid_argument);
}

TEST_CASE("rm_solve matches a single rm_step") {
  const CNSystem sys = cn_system(0.5, 6);
  const std::size_t n = sys.A.size();
  std::vector<double> rhs(n, 1.0);
  RMConfig cfg;
  cfg.max_iters = 1;
  cfg.x_init.assign(n, 0.5);
  cfg.seed = 11;
  const NoiseModel noisy{NoiseKind::uniform, 0.2, n, 0.0};
  const auto res = rm_solve(sys.A, rhs, cfg, noisy);
  SplitMix64 rng(11);
  const auto xi = sample_noise(noisy, rng);
  const auto manual = rm_step(cfg.x_init, 1, sys.A, rhs, xi, cfg.gain);
  CHECK(res.x == manual);
}
