// SPDX-License-Identifier: Apache-2.0
#include "model.hpp"

#include <algorithm>
#include <cmath>

namespace spcs {

void ModelParams::validate() const {
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_argument,
          "dim must be 1, 2 or 3");
  require(std::isfinite(alpha) && alpha > 0, ErrorCode::invalid_argument,
          "alpha must be positive");
  require(std::isfinite(noise) && noise >= 0, ErrorCode::invalid_argument,
          "noise must be nonnegative");
}

double potential_value(const ModelParams &p, double u, std::span<const double> v) {
  p.validate();
  require(v.size() == static_cast<std::size_t>(p.dim), ErrorCode::invalid_argument,
          "potential_value: v must have dim entries");
  double s2 = 0;
  for (double vi : v) s2 += vi * vi;
  return -p.alpha * (s2 / 2 - s2 * s2 / 4) + s2 / 2 - u * v[0];
}

namespace {

// One Newton step on alpha v^3 + (1-alpha) v - u.
double polish_root(double alpha, double u, double v) {
  for (int i = 0; i < 2; ++i) {
    const double f = alpha * v * v * v + (1 - alpha) * v - u;
    const double df = 3 * alpha * v * v + (1 - alpha);
    if (df != 0) v -= f / df;
  }
  return v;
}

} // namespace

int cubic_real_roots(double alpha, double u, std::array<double, 3> &roots) {
  // Depressed form v^3 + p v + q with p = (1-alpha)/alpha, q = -u/alpha.
  const double p = (1 - alpha) / alpha;
  const double q = -u / alpha;
  const double disc = q * q / 4 + p * p * p / 27;
  int n = 0;
  if (disc > 0) {
    const double s = std::sqrt(disc);
    roots[n++] = std::cbrt(-q / 2 + s) + std::cbrt(-q / 2 - s);
  } else {
    const double m = 2 * std::sqrt(-p / 3);
    const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
    const double t = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k)
      roots[n++] = m * std::cos(t - 2 * M_PI * k / 3);
    std::sort(roots.begin(), roots.begin() + n);
  }
  for (int i = 0; i < n; ++i) roots[i] = polish_root(alpha, u, roots[i]);
  return n;
}

PotentialDecomposition positive_minimum(const ModelParams &p, double u) {
  p.validate();
  require(std::isfinite(u) && u > 0, ErrorCode::invalid_argument,
          "positive_minimum requires u > 0 (the u = 0 branch is handled by "
          "radially symmetric quadrature)");
  std::array<double, 3> roots;
  const int n = cubic_real_roots(p.alpha, u, roots);
  // The positive root is unique for u > 0; it is the largest real root.
  double v = roots[n - 1];
  require(v > 0, ErrorCode::internal, "positive cubic root not found");
  const double resid = p.alpha * v * v * v + (1 - p.alpha) * v - u;
  require(std::abs(resid) < 1e-12 * std::max(1.0, std::abs(u)),
          ErrorCode::internal, "cubic residual above tolerance");

  PotentialDecomposition d;
  d.u = u;
  d.vstar = v;
  const double one = 1.0;
  d.a0 = -p.alpha * (v * v / 2 - v * v * v * v / 4) + v * v / 2 - u * v;
  d.lambda1 = (one - p.alpha) / 2 + 1.5 * p.alpha * v * v;
  d.lambda_perp = (one - p.alpha) / 2 + 0.5 * p.alpha * v * v;
  return d;
}

double axis_potential(double alpha, double u, double r) {
  return -alpha * (r * r / 2 - r * r * r * r / 4) + r * r / 2 - u * r;
}

double axis_potential_min(double alpha, double u, double *argmin) {
  if (u > 0) {
    std::array<double, 3> roots;
    const int n = cubic_real_roots(alpha, u, roots);
    const double v = roots[n - 1];
    if (argmin) *argmin = v;
    return axis_potential(alpha, u, v);
  }
  if (alpha > 1) {
    const double r = std::sqrt((alpha - 1) / alpha);
    if (argmin) *argmin = r;
    return -(alpha - 1) * (alpha - 1) / (4 * alpha);
  }
  if (argmin) *argmin = 0;
  return 0;
}

double stationary_log_density(const StationaryDensity &sd, std::span<const double> v) {
  sd.params.validate();
  require(sd.params.noise > 0, ErrorCode::invalid_argument,
          "stationary density degenerates to a Dirac mass at D = 0; use the "
          "asymptotics module");
  return -potential_value(sd.params, sd.ubar, v) / sd.params.noise - sd.log_z;
}

std::size_t GridDensity::cell_count() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(bins[a]);
  return n;
}

double GridDensity::cell_volume() const {
  double vol = 1;
  for (int a = 0; a < dim; ++a) vol *= (hi[a] - lo[a]) / bins[a];
  return vol;
}

double GridDensity::center(std::size_t flat, int axis) const {
  std::size_t rest = flat;
  std::array<std::size_t, 3> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = rest % static_cast<std::size_t>(bins[a]);
    rest /= static_cast<std::size_t>(bins[a]);
  }
  const double h = (hi[axis] - lo[axis]) / bins[axis];
  return lo[axis] + (static_cast<double>(idx[axis]) + 0.5) * h;
}

double free_energy(const ModelParams &p, const GridDensity &density) {
  p.validate();
  require(density.dim == p.dim, ErrorCode::invalid_argument,
          "free_energy: grid dimension mismatch");
  for (int a = 0; a < density.dim; ++a)
    require(density.bins[a] > 0 && density.hi[a] > density.lo[a],
            ErrorCode::invalid_argument, "free_energy: bad grid axis");
  require(density.mass.size() == density.cell_count(), ErrorCode::invalid_argument,
          "free_energy: mass array size mismatch");

  const double vol = density.cell_volume();
  double total = 0;
  for (double m : density.mass) {
    require(m >= 0, ErrorCode::bad_density, "free_energy: negative bin mass");
    total += m;
  }
  require(std::abs(total - 1) <= 1e-6, ErrorCode::bad_density,
          "free_energy: density mass deviates from 1 beyond 1e-6");

  double conf = 0, entropy = 0;
  std::array<double, 3> uf{};
  const std::size_t n = density.mass.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double m = density.mass[i];
    if (m == 0) continue; // empty bins contribute nothing (x log x -> 0)
    double s2 = 0;
    for (int a = 0; a < density.dim; ++a) {
      const double c = density.center(i, a);
      s2 += c * c;
      uf[a] += m * c;
    }
    conf += m * (p.alpha * s2 * s2 / 4 + (1 - p.alpha) * s2 / 2);
    entropy += m * std::log(m / vol);
  }
  double uf2 = 0;
  for (int a = 0; a < density.dim; ++a) uf2 += uf[a] * uf[a];
  return conf - uf2 / 2 + p.noise * entropy;
}

} // namespace spcs
