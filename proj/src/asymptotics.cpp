// SPDX-License-Identifier: Apache-2.0
#include "asymptotics.hpp"

#include <cmath>
#include <limits>

namespace spcs {

namespace {

void check_inputs(double alpha, int dim) {
  require(std::isfinite(alpha) && alpha > 0, ErrorCode::invalid_argument,
          "alpha must be positive");
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_argument,
          "dim must be 1, 2 or 3");
}

// int z1^b1 z2^b2 z3^b3 e^{-Qbar_1(z)} dz with Qbar_1 = (1/2+alpha) z1^2 + |z_perp|^2/2.
double qbar_moment(double alpha, int dim, int b1, int b2, int b3) {
  std::vector<double> lambdas(dim, 0.5);
  lambdas[0] = 0.5 + alpha;
  std::vector<int> beta(dim, 0);
  beta[0] = b1;
  if (dim >= 2) beta[1] = b2;
  if (dim >= 3) beta[2] = b3;
  return gaussian_moment(lambdas, beta, 1.0);
}

} // namespace

LaplaceCoefficients coefficients(double alpha, int dim) {
  check_inputs(alpha, dim);
  LaplaceCoefficients c;
  c.alpha = alpha;
  c.dim = dim;
  const double N = dim;
  const double t = 1 + 2 * alpha;
  const double tp = std::pow(2 * M_PI, N / 2);
  c.c0 = tp / std::sqrt(t);
  c.c1 = -alpha * tp * std::pow(t, -2.5) * (N + 2 + 2 * (N - 1) * alpha);
  c.c2 = tp * std::pow(t, -1.5);
  c.k2 = tp * N / (2 * std::sqrt(t));
  c.k1 = alpha * tp * std::pow(t, -2.5) *
         (-4.5 - 3 * (N - 1) * (1 + alpha) - (N - 1) * (N - 1) * t / 2);
  c.dh_du_limit = c.c2 / c.c0 - 1;
  c.dh_dd_limit = (c.c0 * c.k1 - c.c1 * c.k2) / (c.c0 * c.c0);
  c.bif_slope = -c.dh_dd_limit / c.dh_du_limit;
  return c;
}

double k1_from_moment_table(double alpha, int dim) {
  check_inputs(alpha, dim);
  const int N = dim;
  // I1 = int z1^2 |z|^2 e^{-Qbar_1} = m4 + (N-1) m22
  const double m4 = qbar_moment(alpha, dim, 4, 0, 0);
  const double m22 = N >= 2 ? qbar_moment(alpha, dim, 2, 2, 0) : 0;
  const double I1 = m4 + (N - 1) * m22;
  // I2 = int z1^2 |z|^2 Qbar_1 e^{-Qbar_1}
  const double m6 = qbar_moment(alpha, dim, 6, 0, 0);
  const double m42 = N >= 2 ? qbar_moment(alpha, dim, 4, 2, 0) : 0;
  const double m24 = N >= 2 ? qbar_moment(alpha, dim, 2, 4, 0) : 0;
  const double m222 = N >= 3 ? qbar_moment(alpha, dim, 2, 2, 2) : 0;
  const double I2 = (0.5 + alpha) * m6 + (N - 1) * (1 + alpha) * m42 +
                    (N - 1) * 0.5 * m24 + (N - 1) * (N - 2) * 0.5 * m222;
  return alpha * (I1 - I2);
}

std::vector<MomentTableEntry> moment_table(double alpha, int dim) {
  check_inputs(alpha, dim);
  const double N = dim;
  const double t = 1 + 2 * alpha;
  const double tp = std::pow(2 * M_PI, N / 2);
  std::vector<MomentTableEntry> table;
  table.push_back({"m2", tp * std::pow(t, -1.5), qbar_moment(alpha, dim, 2, 0, 0)});
  table.push_back({"m4", 3 * tp * std::pow(t, -2.5), qbar_moment(alpha, dim, 4, 0, 0)});
  table.push_back({"m6", 15 * tp * std::pow(t, -3.5), qbar_moment(alpha, dim, 6, 0, 0)});
  if (dim >= 2) {
    table.push_back(
        {"m22", tp * std::pow(t, -1.5), qbar_moment(alpha, dim, 2, 2, 0)});
    table.push_back(
        {"m24", 3 * tp * std::pow(t, -1.5), qbar_moment(alpha, dim, 2, 4, 0)});
    table.push_back(
        {"m42", 3 * tp * std::pow(t, -2.5), qbar_moment(alpha, dim, 4, 2, 0)});
  }
  if (dim >= 3)
    table.push_back(
        {"m222", tp * std::pow(t, -1.5), qbar_moment(alpha, dim, 2, 2, 2)});
  return table;
}

ExpansionReport expansion_check(double alpha, int dim, double u, int n_points,
                                const QuadratureConfig &cfg) {
  check_inputs(alpha, dim);
  require(u > 0 && std::abs(u - 1) < 0.2, ErrorCode::invalid_argument,
          "expansion_check: u must lie in the working window |u - 1| < 0.2");
  require(n_points >= 3 && n_points <= 8, ErrorCode::invalid_argument,
          "expansion_check: n_points must be in [3, 8]");

  ExpansionReport rep;
  const double N = dim;
  for (int j = 0; j < n_points; ++j) {
    const double D = 1e-2 / std::pow(2.0, j);
    ModelParams p{dim, alpha, D};
    // One batched pass for F0, F1, F2 at this D.
    const double vs = positive_minimum(p, u).vstar;
    VRPoly f0{{1.0, 0, 0}};
    VRPoly f1 = shift_v1(f0, vs);
    VRPoly f2 = shift_v1(f1, vs);
    const std::vector<VRPoly> polys{f0, f1, f2};
    const auto vals = shifted_moments(p, u, cfg, polys);
    // log_scale is exactly -a0/D, so e^{a0/D} F_k is just the mantissa.
    const double dn = std::pow(D, -N / 2);
    rep.noise.push_back(D);
    rep.g[0].push_back(vals[0].mantissa * dn);
    rep.g[1].push_back(vals[1].mantissa * dn / D);
    rep.g[2].push_back(vals[2].mantissa * dn / D);
  }

  if (u == 1.0) {
    const auto c = coefficients(alpha, dim);
    rep.coeff = {c.c0, c.c1, c.c2};
    rep.coeff_closed_form = true;
  } else {
    // Richardson extrapolation to D = 0 from the two smallest noise values.
    const int j1 = n_points - 1, j2 = n_points - 2;
    for (int k = 0; k < 3; ++k) {
      const double d1 = rep.noise[j1], d2 = rep.noise[j2];
      rep.coeff[k] =
          (d2 * rep.g[k][j1] - d1 * rep.g[k][j2]) / (d2 - d1);
    }
    rep.coeff_closed_form = false;
  }

  for (int k = 0; k < 3; ++k) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = 0; j < n_points; ++j) {
      const double r = std::abs(rep.g[k][j] - rep.coeff[k]);
      rep.residual[k].push_back(r);
      if (r <= 0) continue;
      const double x = std::log(rep.noise[j]), y = std::log(r);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    rep.slope[k] = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                          : std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

double extended_H_at_zero_noise(double alpha, double u) {
  require(u > 0, ErrorCode::invalid_argument,
          "extended_H_at_zero_noise requires u > 0");
  ModelParams p{1, alpha, 0.0};
  return positive_minimum(p, u).vstar - u;
}

} // namespace spcs
