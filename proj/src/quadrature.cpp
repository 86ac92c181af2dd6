// SPDX-License-Identifier: Apache-2.0
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace spcs {

namespace {

constexpr double kNoiseFloor = 1e-6; // below this, callers use asymptotics

// Tight configuration for the inner angular integrals; their error enters the
// radial integrand multiplicatively.
const QuadratureConfig &angular_cfg() {
  static const QuadratureConfig cfg{5e-13, 1e-16, 400, 60.0};
  return cfg;
}

double surface_factor(int dim) {
  // |S^{N-2}|: the angular reduction integrates the polar angle only.
  return dim == 2 ? 2.0 : 2 * M_PI;
}

// Scaled angular integrals Ihat_n(z) = e^{-z} I_n^N(z) for n = 0, 1, 2 at
// once, z >= 0: Ihat_n = int_0^pi cos^n(t) exp(z (cos t - 1)) sin^{N-2} t dt.
void angular_scaled_all(int dim, double z, double out[3]) {
  if (z == 0) {
    if (dim == 2) {
      out[0] = M_PI;
      out[1] = 0;
      out[2] = M_PI / 2;
    } else {
      out[0] = 2;
      out[1] = 0;
      out[2] = 2.0 / 3;
    }
    return;
  }
  auto f = [dim, z](double t, double *o) {
    const double ct = std::cos(t);
    double w = std::exp(z * (ct - 1));
    if (dim == 3) w *= std::sin(t);
    o[0] = w;
    o[1] = w * ct;
    o[2] = w * ct * ct;
  };
  // For large z the mass concentrates near t = 0 on a scale 1/sqrt(z).
  const double bp = std::min(M_PI / 2, 10.0 / std::sqrt(std::max(z, 1.0)));
  adaptive_gk(f, 3, 0.0, M_PI, std::span<const double>(&bp, 1), angular_cfg(),
              out, "angular integral");
}

struct Domain {
  double lo = 0, hi = 0;  // integration bounds (line for dim 1, [0, hi] radial)
  double pmin = 0;        // global minimum of the axis profile
  std::vector<double> breakpoints; // interior critical points
};

// Expand outward from `start` (profile nondecreasing in that direction) until
// the exponent clears the truncation threshold, then bisect the crossing.
double expand_threshold(double alpha, double u, double start, double dir,
                        double pmin, double thresh) {
  double step = 0.5;
  int guard = 0;
  double t = 0; // distance beyond start
  while (axis_potential(alpha, u, start + dir * t) - pmin < thresh) {
    t += step;
    step *= 2;
    require(++guard < 200, ErrorCode::internal, "truncation expansion diverged");
  }
  double lo_t = std::max(0.0, t - step / 2), hi_t = t;
  for (int i = 0; i < 60; ++i) {
    const double mid = (lo_t + hi_t) / 2;
    if (axis_potential(alpha, u, start + dir * mid) - pmin < thresh)
      lo_t = mid;
    else
      hi_t = mid;
  }
  return start + dir * hi_t;
}

Domain make_domain(const ModelParams &p, double u, const QuadratureConfig &cfg) {
  Domain d;
  d.pmin = axis_potential_min(p.alpha, u);
  const double thresh = cfg.truncation_margin * std::log(10.0) * p.noise;

  std::array<double, 3> roots;
  int n = 0;
  if (p.alpha == 1 && u == 0) {
    roots[0] = 0;
    n = 1;
  } else {
    n = cubic_real_roots(p.alpha, u, roots);
  }

  if (p.dim == 1) {
    d.lo = expand_threshold(p.alpha, u, roots[0], -1.0, d.pmin, thresh);
    d.hi = expand_threshold(p.alpha, u, roots[n - 1], +1.0, d.pmin, thresh);
    for (int i = 0; i < n; ++i)
      if (roots[i] > d.lo && roots[i] < d.hi) d.breakpoints.push_back(roots[i]);
  } else {
    const double right = std::max(roots[n - 1], 0.0);
    d.lo = 0;
    d.hi = expand_threshold(p.alpha, u, right, +1.0, d.pmin, thresh);
    for (int i = 0; i < n; ++i)
      if (roots[i] > 0 && roots[i] < d.hi) d.breakpoints.push_back(roots[i]);
  }
  return d;
}

double poly_eval_1d(const VRPoly &poly, double v) {
  const double v2 = v * v;
  double s = 0;
  for (const auto &t : poly) {
    double w = t.c;
    for (int i = 0; i < t.pv; ++i) w *= v;
    for (int i = 0; i < t.pr2; ++i) w *= v2;
    s += w;
  }
  return s;
}

} // namespace

VRPoly shift_v1(const VRPoly &poly, double shift) {
  VRPoly out;
  for (const auto &t : poly) {
    out.push_back({t.c, t.pv + 1, t.pr2});
    if (shift != 0) out.push_back({-shift * t.c, t.pv, t.pr2});
  }
  return out;
}

std::vector<ShiftedIntegral> shifted_moments(const ModelParams &p, double u,
                                             const QuadratureConfig &cfg,
                                             std::span<const VRPoly> polys) {
  p.validate();
  cfg.validate();
  require(std::isfinite(u) && u >= 0, ErrorCode::invalid_argument,
          "shifted_moments requires u >= 0");
  require(p.noise >= kNoiseFloor, ErrorCode::invalid_argument,
          "noise below the quadrature floor 1e-6; use the asymptotics module");
  require(!polys.empty() && polys.size() <= detail::kMaxComponents,
          ErrorCode::invalid_argument, "shifted_moments: bad batch size");
  for (const auto &poly : polys)
    for (const auto &t : poly)
      require(t.pv >= 0 && t.pv <= 2 && t.pr2 >= 0, ErrorCode::invalid_argument,
              "shifted_moments: v1 power must be 0, 1 or 2");

  const Domain dom = make_domain(p, u, cfg);
  const double D = p.noise;
  const int m = static_cast<int>(polys.size());
  std::array<double, detail::kMaxComponents> vals{};

  if (p.dim == 1) {
    auto f = [&](double v, double *o) {
      const double base = std::exp(-(axis_potential(p.alpha, u, v) - dom.pmin) / D);
      for (int k = 0; k < m; ++k) o[k] = base * poly_eval_1d(polys[k], v);
    };
    adaptive_gk(f, m, dom.lo, dom.hi, dom.breakpoints, cfg, vals.data(),
                "line moment");
  } else {
    const int nm1 = p.dim - 1;
    auto f = [&](double r, double *o) {
      double ang[3];
      angular_scaled_all(p.dim, u * r / D, ang);
      double base = std::exp(-(axis_potential(p.alpha, u, r) - dom.pmin) / D);
      for (int i = 0; i < nm1; ++i) base *= r;
      const double r2 = r * r;
      for (int k = 0; k < m; ++k) {
        double s = 0;
        for (const auto &t : polys[k]) {
          double w = t.c;
          for (int i = 0; i < t.pv; ++i) w *= r;
          for (int i = 0; i < t.pr2; ++i) w *= r2;
          s += w * ang[t.pv];
        }
        o[k] = base * s;
      }
    };
    adaptive_gk(f, m, dom.lo, dom.hi, dom.breakpoints, cfg, vals.data(),
                "radial moment");
    const double sf = surface_factor(p.dim);
    for (int k = 0; k < m; ++k) vals[k] *= sf;
  }

  std::vector<ShiftedIntegral> out(polys.size());
  for (int k = 0; k < m; ++k) out[k] = {-dom.pmin / D, vals[k]};
  return out;
}

ShiftedIntegral partition_function(const ModelParams &p, double u,
                                   const QuadratureConfig &cfg) {
  const VRPoly one{{1.0, 0, 0}};
  return shifted_moments(p, u, cfg, std::span<const VRPoly>(&one, 1))[0];
}

ShiftedIntegral centered_moment(const ModelParams &p, double u, int k,
                                const QuadratureConfig &cfg) {
  require(k >= 0 && k <= 2, ErrorCode::invalid_argument,
          "centered_moment: k must be 0, 1 or 2");
  VRPoly poly{{1.0, 0, 0}};
  if (u > 0) {
    const double vs = positive_minimum(p, u).vstar;
    for (int i = 0; i < k; ++i) poly = shift_v1(poly, vs);
  } else {
    for (int i = 0; i < k; ++i) poly = shift_v1(poly, 0.0);
  }
  return shifted_moments(p, u, cfg, std::span<const VRPoly>(&poly, 1))[0];
}

double angular_integral_scaled(int n, int dim, double z) {
  require(dim == 2 || dim == 3, ErrorCode::invalid_argument,
          "angular_integral: dim must be 2 or 3");
  require(n >= 0 && n <= 16, ErrorCode::invalid_argument,
          "angular_integral: n out of range");
  require(std::isfinite(z), ErrorCode::invalid_argument,
          "angular_integral: z must be finite");
  const double az = std::abs(z);
  if (n <= 2 && z >= 0) {
    double all[3];
    angular_scaled_all(dim, z, all);
    return all[n];
  }
  // General n (and z < 0 via theta -> pi - theta symmetry).
  const double sign = (z < 0 && n % 2 == 1) ? -1.0 : 1.0;
  auto f = [n, dim, az](double t) {
    const double ct = std::cos(t);
    double w = std::exp(az * (ct - 1));
    if (dim == 3) w *= std::sin(t);
    double c = 1;
    for (int i = 0; i < n; ++i) c *= ct;
    return w * c;
  };
  const double bp = std::min(M_PI / 2, 10.0 / std::sqrt(std::max(az, 1.0)));
  return sign * adaptive_gk_1(f, 0.0, M_PI, std::span<const double>(&bp, 1),
                              angular_cfg(), "angular integral");
}

double angular_integral(int n, int dim, double z) {
  return std::exp(std::abs(z)) * angular_integral_scaled(n, dim, z);
}

double radial_weight(const ModelParams &p, double r) {
  p.validate();
  require(p.noise > 0, ErrorCode::invalid_argument, "radial_weight requires D > 0");
  const double D = p.noise;
  return std::exp(p.alpha / D * (r * r / 2 - r * r * r * r / 4) - r * r / (2 * D));
}

namespace {

double double_factorial_odd(int n) { // (2n-1)!! for n >= 0
  double v = 1;
  for (int i = 2 * n - 1; i > 1; i -= 2) v *= i;
  return v;
}

} // namespace

double gaussian_moment(std::span<const double> lambdas, std::span<const int> beta,
                       double noise) {
  require(!lambdas.empty() && lambdas.size() == beta.size(),
          ErrorCode::invalid_argument, "gaussian_moment: size mismatch");
  require(noise > 0, ErrorCode::invalid_argument, "gaussian_moment: D must be > 0");
  int total = 0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    require(lambdas[i] > 0, ErrorCode::invalid_argument,
            "gaussian_moment: lambdas must be positive");
    require(beta[i] >= 0, ErrorCode::invalid_argument,
            "gaussian_moment: beta must be nonnegative");
    if (beta[i] % 2 == 1) return 0.0;
    total += beta[i];
  }
  const double n = static_cast<double>(lambdas.size());
  double value = std::pow(noise, (n + total) / 2);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    value *= std::pow(lambdas[i], -(1.0 + beta[i]) / 2);
    // 1-D table: int e^{-r^2} r^{2k} dr = sqrt(pi) (2k-1)!! / 2^k
    const int k = beta[i] / 2;
    value *= std::sqrt(M_PI) * double_factorial_odd(k) / std::pow(2.0, k);
  }
  return value;
}

void truncation_bounds(const ModelParams &p, double u, const QuadratureConfig &cfg,
                       double &lo, double &hi) {
  p.validate();
  cfg.validate();
  require(p.noise > 0, ErrorCode::invalid_argument, "truncation needs D > 0");
  const Domain d = make_domain(p, u, cfg);
  lo = d.lo;
  hi = d.hi;
}

} // namespace spcs
