// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asymptotics.hpp"
#include "consistency.hpp"
#include "oracles.hpp"

using namespace spcs;

TEST_CASE("H vanishes identically on the symmetric branch") {
  QuadratureConfig cfg;
  for (int dim : {1, 2, 3}) {
    for (double D : {0.05, 0.5, 3.0}) {
      ModelParams p{dim, 2.0, D};
      CHECK(evaluate_H(p, 0.0, cfg) == 0.0);
    }
  }
}

TEST_CASE("H reference values (frozen dual-route oracles)") {
  QuadratureConfig cfg;
  // two independent quadrature routes (mpmath tanh-sinh vs 2e6-point
  // trapezoid) agreed to 2.8e-17 on this value
  ModelParams p1{1, 2.0, 0.1};
  CHECK(evaluate_H(p1, 0.8, cfg) ==
        doctest::Approx(0.12572518452185).epsilon(1e-9));
  // 2-D: mpmath tensor quadrature equals the radial-Bessel route to 2.5e-32
  ModelParams p2{2, 2.0, 0.3};
  CHECK(evaluate_H(p2, 0.8, cfg) ==
        doctest::Approx(-0.106544076776167).epsilon(1e-9));
}

TEST_CASE("zero-noise extension") {
  CHECK(extended_H_at_zero_noise(2.0, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  // frozen: vstar(2, 0.5) - 0.5
  CHECK(extended_H_at_zero_noise(2.0, 0.5) ==
        doctest::Approx(0.384646177119316).epsilon(1e-12));
  for (double u : {0.1, 0.4, 0.9}) CHECK(extended_H_at_zero_noise(2.0, u) > 0);
  for (double u : {1.1, 1.7, 2.5}) CHECK(extended_H_at_zero_noise(2.0, u) < 0);
}

TEST_CASE("derivatives match central finite differences") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  {
    ModelParams p{1, 2.0, 0.3};
    const double an = evaluate_dH_du(p, 0.5, cfg);
    const double fd = oracles::fd_dH_du(p, 0.5, 1e-5, cfg);
    CHECK(an == doctest::Approx(fd).epsilon(1e-6));
  }
  {
    ModelParams p{1, 2.0, 0.3};
    const double an = evaluate_dH_dD(p, 0.7, cfg);
    const double fd = oracles::fd_dH_dD(p, 0.7, 1e-5, cfg);
    CHECK(an == doctest::Approx(fd).epsilon(1e-5));
  }
  {
    ModelParams p{2, 6.0, 0.4};
    CHECK(evaluate_dH_du(p, 0.6, cfg) ==
          doctest::Approx(oracles::fd_dH_du(p, 0.6, 1e-5, cfg)).epsilon(1e-5));
    CHECK(evaluate_dH_dD(p, 0.6, cfg) ==
          doctest::Approx(oracles::fd_dH_dD(p, 0.6, 1e-5, cfg)).epsilon(1e-5));
  }
}

TEST_CASE("small-noise limits of the derivatives") {
  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 1e-3};
  CHECK(std::abs(evaluate_dH_du(p, 1.0, cfg) - (-0.8)) < 2e-2);
  CHECK(std::abs(evaluate_dH_dD(p, 1.0, cfg) - (-0.24)) < 3e-2);
  ModelParams q{2, 2.0, 1e-3};
  CHECK(std::abs(evaluate_dH_du(q, 1.0, cfg) - (-0.8)) < 2e-2);
  CHECK(std::abs(evaluate_dH_dD(q, 1.0, cfg) - (-0.64)) < 3e-2);
}

TEST_CASE("large-noise monotonicity of dH/du") {
  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 10.0};
  for (int i = 1; i <= 16; ++i) {
    const double u = 3.0 * i / 16;
    CHECK(evaluate_dH_du(p, u, cfg) < 0);
  }
}

TEST_CASE("H is negative beyond the bracketing interval") {
  QuadratureConfig cfg;
  for (double alpha : {1.0, 2.0, 6.0}) {
    for (double D : {0.1, 1.0, 5.0}) {
      ModelParams p{1, alpha, D};
      CHECK(evaluate_H(p, 3.0, cfg) < 0);
      CHECK(evaluate_H(p, 5.0, cfg) < 0);
    }
  }
}

TEST_CASE("integration-by-parts identity") {
  QuadratureConfig cfg;
  for (int dim : {1, 2}) {
    for (double u : {0.2, 0.8}) {
      ModelParams p{dim, 2.0, 0.3};
      const auto [direct, parts] = zh_identity(p, u, cfg);
      const double scale = std::max(std::abs(direct), std::abs(parts));
      CHECK(std::abs(direct - parts) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("positive root: found and absent regimes") {
  QuadratureConfig cfg;
  // disordered regime far above D_c
  ModelParams hi{1, 2.0, 2.0};
  CHECK_FALSE(find_positive_root(hi, cfg).has_value());
  // frozen oracle at D = 0.3
  ModelParams mid{1, 2.0, 0.3};
  const auto root = find_positive_root(mid, cfg, 1e-12);
  REQUIRE(root.has_value());
  CHECK(*root == doctest::Approx(0.823398309202825).epsilon(1e-9));
  // u(D) -> 1 as D -> 0
  ModelParams lo{1, 2.0, 1e-3};
  const auto near_one = find_positive_root(lo, cfg);
  REQUIRE(near_one.has_value());
  CHECK(std::abs(*near_one - 1.0) < 2e-2);
}

TEST_CASE("critical noise for alpha = 2") {
  QuadratureConfig cfg;
  // frozen mpmath bisection oracles
  CHECK(critical_noise(2.0, 1, cfg) ==
        doctest::Approx(0.529009753107).epsilon(1e-6));
  CHECK(critical_noise(2.0, 2, cfg) ==
        doctest::Approx(0.354372785329).epsilon(1e-6));
}

TEST_CASE("critical noise agrees with the first root disappearance") {
  QuadratureConfig cfg;
  const double dc = critical_noise(2.0, 1, cfg);
  // bisect on root existence
  double lo = 0.9 * dc, hi = 1.1 * dc;
  ModelParams plo{1, 2.0, lo}, phi{1, 2.0, hi};
  REQUIRE(find_positive_root(plo, cfg).has_value());
  REQUIRE_FALSE(find_positive_root(phi, cfg).has_value());
  while (hi - lo > 1e-5) {
    const double mid = (lo + hi) / 2;
    ModelParams pm{1, 2.0, mid};
    if (find_positive_root(pm, cfg))
      lo = mid;
    else
      hi = mid;
  }
  CHECK(std::abs((lo + hi) / 2 - dc) < 1e-4);
}

TEST_CASE("bifurcation trace in one dimension") {
  QuadratureConfig cfg;
  const auto curve = trace_bifurcation(2.0, 1, 1e-3, 0.8, 0.0, cfg, 1e-10);
  REQUIRE(curve.samples.size() >= 10);
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    CHECK(curve.samples[i].noise > curve.samples[i - 1].noise);
    CHECK(curve.samples[i].u < curve.samples[i - 1].u);
    CHECK(curve.samples[i].u > 0);
  }
  // every sample satisfies |H| < root_tol
  for (std::size_t i = 0; i < curve.samples.size(); i += 7) {
    ModelParams p{1, 2.0, curve.samples[i].noise};
    CHECK(std::abs(evaluate_H(p, curve.samples[i].u, cfg)) < 1e-9);
  }
  CHECK(curve.d_critical == doctest::Approx(0.529009753107).epsilon(1e-5));
  // perpendicular approach: |dH/du| shrinking along the tail
  const auto &tail = curve.samples.back();
  CHECK(std::abs(tail.dh_du) < 1e-2);
  const auto &before = curve.samples[curve.samples.size() - 4];
  CHECK(std::abs(tail.dh_du) < std::abs(before.dh_du));
}

TEST_CASE("phase scan: classification and boundary") {
  QuadratureConfig cfg;
  const std::vector<double> alphas{0.5, 2.0};
  const std::vector<double> noises{0.2, 0.35, 0.45, 0.6, 0.8};
  const auto pd = phase_scan(alphas, noises, 1, cfg, 2);
  REQUIRE(pd.grid.size() == alphas.size() * noises.size());
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    int transitions = 0;
    for (std::size_t di = 0; di + 1 < noises.size(); ++di) {
      const auto &a = pd.grid[ai * noises.size() + di];
      const auto &b = pd.grid[ai * noises.size() + di + 1];
      REQUIRE(a.ok);
      REQUIRE(b.ok);
      CHECK(a.n_states >= b.n_states); // one transition, 2 -> 1, as D grows
      if (a.n_states != b.n_states) ++transitions;
    }
    CHECK(transitions <= 1);
  }
  REQUIRE(pd.boundary.size() == alphas.size());
  for (const auto &[alpha, dc] : pd.boundary) {
    ModelParams p{1, alpha, dc};
    CHECK(std::abs(evaluate_dH_du(p, 0.0, cfg)) < 1e-6);
  }
  // boundary agrees with the standalone bisection
  CHECK(pd.boundary[1].second ==
        doctest::Approx(critical_noise(2.0, 1, cfg)).epsilon(1e-6));
}

TEST_CASE("argument validation") {
  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 0.3};
  CHECK_THROWS_AS((void)evaluate_H(p, -0.1, cfg), Error);
  CHECK_THROWS_AS((void)evaluate_dH_dD(p, 0.0, cfg), Error);
  ModelParams zero_noise{1, 2.0, 0.0};
  CHECK_THROWS_AS((void)evaluate_H(zero_noise, 0.5, cfg), Error);
  CHECK_THROWS_AS((void)find_positive_root(p, cfg, -1.0), Error);
  CHECK_THROWS_AS((void)trace_bifurcation(2.0, 1, 1e-6, 0.5, 0.0, cfg), Error);
  const std::vector<double> empty;
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)phase_scan(empty, one, 1, cfg), Error);
  const std::vector<double> unsorted{0.5, 0.2};
  CHECK_THROWS_AS((void)phase_scan(unsorted, one, 1, cfg), Error);
}
