// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "quadrature.hpp"

using namespace spcs;

TEST_CASE("angular integrals at z = 0") {
  CHECK(angular_integral(0, 2, 0.0) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(angular_integral(1, 2, 0.0) == 0.0);
  CHECK(angular_integral(2, 2, 0.0) == doctest::Approx(M_PI / 2).epsilon(1e-14));
  CHECK(angular_integral(0, 3, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("angular integral N = 3 closed forms") {
  // I_0^3(z) = 2 sinh(z)/z via t = cos(theta)
  for (double z : {0.5, 1.0, 3.0, 10.0}) {
    CHECK(angular_integral(0, 3, z) ==
          doctest::Approx(2 * std::sinh(z) / z).epsilon(1e-12));
    const double i1 = 2 * (z * std::cosh(z) - std::sinh(z)) / (z * z);
    CHECK(angular_integral(1, 3, z) == doctest::Approx(i1).epsilon(1e-12));
  }
  CHECK(angular_integral(0, 3, 1.0) == doctest::Approx(2.3504023872876028).epsilon(1e-12));
}

TEST_CASE("angular integral N = 2 matches the modified Bessel series") {
  // I_n^2(z) = pi * BesselI_n(z)
  for (double z : {0.25, 1.0, 2.0, 5.0, 12.0}) {
    CHECK(angular_integral(0, 2, z) ==
          doctest::Approx(M_PI * oracles::bessel_i(0, z)).epsilon(1e-12));
    CHECK(angular_integral(1, 2, z) ==
          doctest::Approx(M_PI * oracles::bessel_i(1, z)).epsilon(1e-12));
  }
  // frozen oracle: pi * BesselI_1(2)
  CHECK(angular_integral(1, 2, 2.0) ==
        doctest::Approx(4.9971330570578088).epsilon(1e-12));
  // negative z by symmetry
  CHECK(angular_integral(1, 2, -2.0) ==
        doctest::Approx(-4.9971330570578088).epsilon(1e-12));
}

TEST_CASE("radial weight") {
  ModelParams p{1, 2.0, 0.5};
  CHECK(radial_weight(p, 0.0) == 1.0);
  CHECK(radial_weight(p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // completing-the-square bound: E_D(r) <= exp(alpha/4D) exp(-r^2/2D)
  for (double alpha : {0.5, 2.0, 6.0}) {
    for (double D : {0.1, 0.5, 1.0}) {
      ModelParams q{1, alpha, D};
      for (double r = 0; r < 4.0; r += 0.05) {
        CHECK(radial_weight(q, r) <=
              std::exp(alpha / (4 * D)) * std::exp(-r * r / (2 * D)) + 1e-15);
      }
    }
  }
}

TEST_CASE("partition function recovers c0(1) as D -> 0") {
  QuadratureConfig cfg;
  // Z e^{a0/D} D^{-1/2} -> c0(1) = sqrt(2 pi / 5) for alpha = 2, N = 1
  ModelParams p2{1, 2.0, 1e-2};
  ModelParams p3{1, 2.0, 1e-3};
  const double g2 = partition_function(p2, 1.0, cfg).mantissa / std::sqrt(1e-2);
  const double g3 = partition_function(p3, 1.0, cfg).mantissa / std::sqrt(1e-3);
  const double richardson = (1e-2 * g3 - 1e-3 * g2) / (1e-2 - 1e-3);
  const double c0 = std::sqrt(2 * M_PI / 5);
  CHECK(richardson == doctest::Approx(c0).epsilon(1e-4));
}

TEST_CASE("partition function: unshifted value at moderate D") {
  // frozen mpmath oracle: Z(alpha=2, D=0.5, u=0, N=1) = 2.76134897426974
  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 0.5};
  const auto z = partition_function(p, 0.0, cfg);
  CHECK(z.value() == doctest::Approx(2.76134897426974).epsilon(1e-10));
  CHECK(z.mantissa > 0);
}

TEST_CASE("partition function dim = 2 at u = 0: radial equals tensor") {
  QuadratureConfig cfg;
  ModelParams p{2, 2.0, 0.3};
  const auto z = partition_function(p, 0.0, cfg);
  // direct 2-D tensor quadrature of exp(-(P - pmin)/D)
  const double pmin = axis_potential_min(p.alpha, 0.0);
  double lo, hi;
  truncation_bounds(p, 0.0, cfg, lo, hi);
  auto inner = [&](double v1) {
    auto f = [&](double v2) {
      const std::array<double, 2> v{v1, v2};
      return std::exp(-(potential_value(p, 0.0, v) - pmin) / p.noise);
    };
    const double bp = 0.0;
    return adaptive_gk_1(f, -hi, hi, std::span<const double>(&bp, 1), cfg,
                         "tensor inner");
  };
  const double bp = 0.0;
  const double tensor = adaptive_gk_1(inner, -hi, hi,
                                      std::span<const double>(&bp, 1), cfg,
                                      "tensor outer");
  CHECK(z.mantissa == doctest::Approx(tensor).epsilon(1e-9));
}

TEST_CASE("centered moments: F0 equals the partition function") {
  QuadratureConfig cfg;
  for (int dim : {1, 2}) {
    ModelParams p{dim, 2.0, 0.3};
    const auto f0 = centered_moment(p, 0.7, 0, cfg);
    const auto z = partition_function(p, 0.7, cfg);
    CHECK(f0.mantissa == doctest::Approx(z.mantissa).epsilon(1e-12));
    CHECK(f0.log_scale == z.log_scale);
    CHECK(z.mantissa > 0);
  }
}

TEST_CASE("centered moment ratios approach the Laplace coefficients") {
  QuadratureConfig cfg;
  // alpha = 2, N = 1: F1/(F0 D) -> c1(1)/c0(1) = -0.24
  {
    ModelParams p{1, 2.0, 1e-3};
    const auto f0 = centered_moment(p, 1.0, 0, cfg);
    const auto f1 = centered_moment(p, 1.0, 1, cfg);
    CHECK(f1.mantissa / (f0.mantissa * p.noise) ==
          doctest::Approx(-0.24).epsilon(2e-3));
  }
  // alpha = 2, N = 2: F2/(F0 D) -> c2(1)/c0(1) = 1/(1+2 alpha) = 0.2
  {
    ModelParams p{2, 2.0, 1e-3};
    const auto f0 = centered_moment(p, 1.0, 0, cfg);
    const auto f2 = centered_moment(p, 1.0, 2, cfg);
    CHECK(f2.mantissa / (f0.mantissa * p.noise) ==
          doctest::Approx(0.2).epsilon(2e-3));
  }
}

TEST_CASE("gaussian moment closed forms") {
  // spec example: lambda = (1/2 + alpha, 1/2), alpha = 2, beta = (2,0), D = 1
  const std::vector<double> lam{2.5, 0.5};
  const std::vector<int> beta{2, 0};
  CHECK(gaussian_moment(lam, beta, 1.0) ==
        doctest::Approx(2 * M_PI * std::pow(5.0, -1.5)).epsilon(1e-14));
  // odd component vanishes
  const std::vector<int> odd{1, 2};
  CHECK(gaussian_moment(lam, odd, 1.0) == 0.0);
  // all-ones lambdas, beta = 0: pi^{N/2}
  for (int n : {1, 2, 3}) {
    const std::vector<double> ones(n, 1.0);
    const std::vector<int> zeros(n, 0);
    CHECK(gaussian_moment(ones, zeros, 1.0) ==
          doctest::Approx(std::pow(M_PI, n / 2.0)).epsilon(1e-14));
  }
}

TEST_CASE("gaussian moment matches quadrature for random inputs") {
  QuadratureConfig cfg;
  oracles::Lcg rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<double> lam(n);
    std::vector<int> beta(n);
    int total = 0;
    for (int i = 0; i < n; ++i) {
      lam[i] = rng.uniform(0.2, 5.0);
      beta[i] = 2 * static_cast<int>(rng.uniform(0.0, 2.999)); // 0, 2 or 4
      total += beta[i];
    }
    if (total > 6) beta[0] = 0;
    const double D = rng.uniform(0.3, 2.0);
    const double closed = gaussian_moment(lam, beta, D);
    const double quad = oracles::gaussian_moment_quadrature(lam, beta, D, cfg);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
  }
}

TEST_CASE("radial reduction vs tensor quadrature for H in 2-D") {
  QuadratureConfig cfg;
  for (double alpha : {1.0, 2.0, 6.0}) {
    for (double u : {0.2, 0.8, 1.2}) {
      for (double D : {0.05, 0.3, 1.0}) {
        ModelParams p{2, alpha, D};
        const double h_radial = spcs::evaluate_H(p, u, cfg);
        const double h_tensor = oracles::tensor_H_2d(p, u, cfg);
        CHECK(h_radial == doctest::Approx(h_tensor).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("tail truncation soundness") {
  // doubling the truncation margin changes nothing beyond rel_tol
  QuadratureConfig base;
  QuadratureConfig wide = base;
  wide.truncation_margin = 120.0;
  for (double D : {0.05, 0.3}) {
    ModelParams p{1, 2.0, D};
    for (int k : {0, 1, 2}) {
      const auto a = centered_moment(p, 0.8, k, base);
      const auto b = centered_moment(p, 0.8, k, wide);
      const double scale = std::max(std::abs(a.mantissa), std::abs(b.mantissa));
      CHECK(std::abs(a.mantissa - b.mantissa) <= base.rel_tol * scale * 10);
    }
    double lo1, hi1, lo2, hi2;
    truncation_bounds(p, 0.8, base, lo1, hi1);
    truncation_bounds(p, 0.8, wide, lo2, hi2);
    CHECK(hi2 > hi1);
    CHECK(lo2 < lo1);
  }
}

TEST_CASE("shifted representation recombines to the naive value") {
  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 2.0};
  const auto f0 = centered_moment(p, 0.5, 0, cfg);
  // naive quadrature without any shift (no overflow at D = 2)
  double lo, hi;
  truncation_bounds(p, 0.5, cfg, lo, hi);
  auto f = [&](double v) {
    return std::exp(-axis_potential(p.alpha, 0.5, v) / p.noise);
  };
  const double naive = adaptive_gk_1(f, lo, hi, {}, cfg, "naive");
  CHECK(f0.value() == doctest::Approx(naive).epsilon(1e-10));
}

TEST_CASE("quadrature failure reports nonconvergence") {
  QuadratureConfig tiny;
  tiny.rel_tol = 1e-15;
  tiny.abs_tol = 1e-300;
  tiny.max_subdivisions = 10;
  ModelParams p{1, 6.0, 1e-4};
  bool threw = false;
  try {
    (void)centered_moment(p, 0.3, 1, tiny);
  } catch (const Error &e) {
    threw = e.code() == ErrorCode::quadrature_nonconvergence;
  }
  CHECK(threw);
}

TEST_CASE("configuration and argument validation") {
  QuadratureConfig bad;
  bad.rel_tol = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.max_subdivisions = 3;
  CHECK_THROWS_AS(bad.validate(), Error);

  QuadratureConfig cfg;
  ModelParams below_floor{1, 2.0, 1e-7};
  CHECK_THROWS_AS((void)partition_function(below_floor, 0.5, cfg), Error);
  ModelParams p{1, 2.0, 0.5};
  CHECK_THROWS_AS((void)centered_moment(p, 0.5, 3, cfg), Error);
  CHECK_THROWS_AS((void)angular_integral(0, 1, 0.5), Error);
}
