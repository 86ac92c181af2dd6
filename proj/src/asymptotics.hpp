// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace spcs {

// Closed-form small-noise quantities at u = 1: leading coefficients of the
// F_k expansions, the dH/dD integrals, and the limits they assemble into.
struct LaplaceCoefficients {
  double alpha = 0;
  int dim = 1;
  double c0 = 0, c1 = 0, c2 = 0;
  double k1 = 0, k2 = 0;
  double dh_du_limit = 0; // c2/c0 - 1 = -2 alpha / (1 + 2 alpha)
  double dh_dd_limit = 0; // (c0 k1 - c1 k2) / c0^2
  double bif_slope = 0;   // -dh_dd_limit / dh_du_limit
};

LaplaceCoefficients coefficients(double alpha, int dim);

// k1(1) assembled from the Gaussian moment table (alpha (I1 - I2) route);
// must agree with the closed form in `coefficients` to 1e-12 relative.
double k1_from_moment_table(double alpha, int dim);

// The m_* table entries valid for this dim: closed forms next to the same
// values assembled from gaussian_moment with lambda = (1/2 + alpha, 1/2, ...).
struct MomentTableEntry {
  std::string name;
  double closed_form = 0;
  double via_gaussian_moment = 0;
};

std::vector<MomentTableEntry> moment_table(double alpha, int dim);

// Convergence check of the F_k expansions: g0 = D^{-N/2} e^{a0/D} F0 and
// g1, g2 the same normalization divided by one more power of D; residuals
// against the leading coefficients scale as O(D).
struct ExpansionReport {
  std::vector<double> noise;               // D sequence (halving from 1e-2)
  std::array<std::vector<double>, 3> g;    // normalized quadrature values
  std::array<double, 3> coeff{};           // c0, c1, c2 (closed or extrapolated)
  bool coeff_closed_form = false;
  std::array<std::vector<double>, 3> residual;
  std::array<double, 3> slope{};           // log-log fit of residual vs D
};

ExpansionReport expansion_check(double alpha, int dim, double u, int n_points,
                                const QuadratureConfig &cfg);

// H(u, 0) = v1*(u) - u.
double extended_H_at_zero_noise(double alpha, double u);

} // namespace spcs
