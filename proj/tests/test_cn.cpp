#include <doctest.h>

#include <cmath>

#include "cnrm/crank_nicolson.hpp"
#include "cnrm/rng.hpp"
#include "oracles.hpp"

using namespace cnrm;

namespace {

HeatProblem unit_problem(double diffusivity) {
  HeatProblem p;
  p.diffusivity = diffusivity;
  p.x_lo = 0.0;
  p.x_hi = 1.0;
  p.initial = [](double x) { return x * (1.0 - x); };
  p.boundary_lo = [](double) { return 0.0; };
  p.boundary_hi = [](double) { return 0.0; };
  return p;
}

}  // namespace

TEST_CASE("cn_system: a=1, N=4") {
  const CNSystem sys = cn_system(1.0, 4);
  CHECK(sys.A.diag == std::vector<double>{4.0, 4.0, 4.0});
  CHECK(sys.A.sub == std::vector<double>{-1.0, -1.0});
  CHECK(sys.A.sup == std::vector<double>{-1.0, -1.0});
  CHECK(sys.B.diag == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(sys.B.sub == std::vector<double>{1.0, 1.0});
}

TEST_CASE("cn_system: a=0 degenerates to 2I on both sides") {
  const CNSystem sys = cn_system(0.0, 4);
  CHECK(sys.A.diag == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(sys.A.sub == std::vector<double>{0.0, 0.0});
  CHECK(sys.B.diag == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(sys.B.sup == std::vector<double>{0.0, 0.0});
}

TEST_CASE("cn_system: a=0.5, N=3") {
  const CNSystem sys = cn_system(0.5, 3);
  CHECK(sys.A.diag == std::vector<double>{3.0, 3.0});
  CHECK(sys.A.sub == std::vector<double>{-0.5});
  CHECK(sys.B.diag == std::vector<double>{1.0, 1.0});
  CHECK(sys.B.sub == std::vector<double>{0.5});
}

TEST_CASE("cn_system rejects N < 2") {
  CHECK_THROWS_AS(cn_system(1.0, 1), std::invalid_argument);
}

TEST_CASE("A + B = 4I exactly, A symmetric dominant, spectrum positive") {
  SplitMix64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const double a = 2.0 * rng.next_open_unit();  // (0, 2]
    const std::size_t n_int = 2 + static_cast<std::size_t>(rng.next_u64() % 39);
    const CNSystem sys = cn_system(a, n_int);
    for (std::size_t i = 0; i < sys.A.size(); ++i) {
      CHECK(sys.A.diag[i] + sys.B.diag[i] == 4.0);
      if (i + 1 < sys.A.size()) {
        CHECK(sys.A.sub[i] + sys.B.sub[i] == 0.0);
        CHECK(sys.A.sup[i] + sys.B.sup[i] == 0.0);
      }
    }
    CHECK(sys.A.symmetric());
    CHECK(sys.B.symmetric());
    CHECK(spectrum(sys.A).min_real > 2.0);
  }
}

TEST_CASE("make_grid computes dx, dt and the diffusion number") {
  const HeatProblem p = unit_problem(1.0);
  const Grid g = make_grid(p, 10, 100, 1.0);
  CHECK(g.dx == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.dt == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(g.diffusion_number == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.interior() == 9);
  CHECK(g.node_x(0) == 0.0);
  CHECK(g.node_x(10) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(make_grid(p, 1, 10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(p, 10, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(p, 10, 10, 0.0), std::invalid_argument);
}

TEST_CASE("HeatProblem validation") {
  HeatProblem p = unit_problem(1.0);
  p.diffusivity = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = unit_problem(0.0);  // degenerate no-diffusion limit is allowed
  CHECK_NOTHROW(p.validate());
  p.x_hi = p.x_lo;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("build_rhs: a=1, N=4, ones with zero boundaries") {
  const CNSystem sys = cn_system(1.0, 4);
  const std::vector<double> u{1.0, 1.0, 1.0};
  const auto rhs = build_rhs(sys, 1.0, u, 0.0, 0.0, 0.0, 0.0);
  const auto expected = oracle::dense_matvec(sys.B, u);
  CHECK(rhs == std::vector<double>{1.0, 2.0, 1.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(rhs[i] == doctest::Approx(expected[i]));
}

TEST_CASE("build_rhs: a=0 reduces to 2 u_m for any boundaries") {
  const CNSystem sys = cn_system(0.0, 4);
  const std::vector<double> u{3.0, -1.0, 2.0};
  const auto rhs = build_rhs(sys, 0.0, u, 7.0, -4.0, 5.0, 9.0);
  CHECK(rhs == std::vector<double>{6.0, -2.0, 4.0});
}

TEST_CASE("build_rhs: boundary contribution a*(g(t_m) + g(t_{m+1}))") {
  const CNSystem sys = cn_system(1.0, 4);
  const std::vector<double> u{0.0, 0.0, 0.0};
  const auto rhs = build_rhs(sys, 1.0, u, 1.0, 0.0, 1.0, 0.0);
  CHECK(rhs == std::vector<double>{2.0, 0.0, 0.0});
}

TEST_CASE("build_rhs via problem boundary functions") {
  HeatProblem p = unit_problem(1.0);
  p.boundary_lo = [](double t) { return 1.0 + t; };
  const Grid g = make_grid(p, 4, 10, 1.0);  // dt = 0.1, a = 1/0.0625 * 0.1
  const CNSystem sys = assemble_cn(g);
  const std::vector<double> u{0.0, 0.0, 0.0};
  const auto rhs = build_rhs(sys, g, p, u, 3);
  const double a = g.diffusion_number;
  CHECK(rhs[0] == doctest::Approx(a * ((1.0 + 0.3) + (1.0 + 0.4))).epsilon(1e-12));
  CHECK(rhs[1] == 0.0);
  CHECK(rhs[2] == 0.0);
}

TEST_CASE("build_rhs is affine in u_m") {
  SplitMix64 rng(321);
  const CNSystem sys = cn_system(0.7, 12);
  const std::size_t n = sys.A.size();
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> u(n), v(n), sum(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = 2.0 * rng.next_unit() - 1.0;
      v[i] = 2.0 * rng.next_unit() - 1.0;
      sum[i] = u[i] + v[i];
    }
    const auto lhs = build_rhs(sys, 0.7, sum, 0.3, 0.9, -0.2, 0.4);
    const auto base = build_rhs(sys, 0.7, v, 0.3, 0.9, -0.2, 0.4);
    const auto bu = matvec(sys.B, u);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(lhs[i] - base[i] == doctest::Approx(bu[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_rhs rejects mismatched interior length") {
  const CNSystem sys = cn_system(1.0, 4);
  CHECK_THROWS_AS(build_rhs(sys, 1.0, std::vector<double>{1.0}, 0, 0, 0, 0),
                  std::invalid_argument);
}
