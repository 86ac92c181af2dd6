// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace spcs {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
  double truncation_margin = 60.0; // exponent decades kept below the peak

  void validate() const {
    require(rel_tol > 0 && abs_tol > 0, ErrorCode::invalid_argument,
            "quadrature tolerances must be positive");
    require(max_subdivisions >= 10, ErrorCode::invalid_argument,
            "max_subdivisions must be at least 10");
    require(truncation_margin > 0, ErrorCode::invalid_argument,
            "truncation_margin must be positive");
  }
};

// Integral represented as mantissa * exp(log_scale). The scale carries the
// exp(-a0(u)/D) factor so that mantissas stay in floating-point range; ratios
// of integrals taken at the same (u, D) cancel the scale exactly.
struct ShiftedIntegral {
  double log_scale = 0;
  double mantissa = 0;

  double value() const { return mantissa * std::exp(log_scale); }
  double log_value() const { return std::log(mantissa) + log_scale; }
};

namespace detail {

inline constexpr int kMaxComponents = 8;

// Kronrod 15 / Gauss 7 nodes and weights on [-1, 1] (QUADPACK dqk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct IntervalResult {
  double a, b;
  std::array<double, kMaxComponents> value;
  std::array<double, kMaxComponents> error;
  std::array<double, kMaxComponents> resabs; // int |f|, for the roundoff floor
  double worst; // max component error, used as the refinement priority
};

template <class F>
IntervalResult gk15(F &&f, int m, double a, double b) {
  const double h = (b - a) / 2;
  const double c = (a + b) / 2;
  std::array<double, kMaxComponents> fc{};
  f(c, fc.data());

  std::array<double, kMaxComponents> resg{}, resk{}, resabs{};
  std::array<std::array<double, kMaxComponents>, 7> flo, fhi;
  for (int k = 0; k < m; ++k) {
    resk[k] = kWgk[7] * fc[k];
    resg[k] = kWg[3] * fc[k];
    resabs[k] = kWgk[7] * std::abs(fc[k]);
  }
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    f(c - dx, flo[j].data());
    f(c + dx, fhi[j].data());
    for (int k = 0; k < m; ++k) {
      const double s = flo[j][k] + fhi[j][k];
      resk[k] += kWgk[j] * s;
      resabs[k] += kWgk[j] * (std::abs(flo[j][k]) + std::abs(fhi[j][k]));
      if (j % 2 == 1) resg[k] += kWg[j / 2] * s;
    }
  }

  IntervalResult out;
  out.a = a;
  out.b = b;
  out.worst = 0;
  const double eps = 2.220446049250313e-16;
  for (int k = 0; k < m; ++k) {
    const double reskh = resk[k] / 2;
    double resasc = kWgk[7] * std::abs(fc[k] - reskh);
    for (int j = 0; j < 7; ++j)
      resasc += kWgk[j] * (std::abs(flo[j][k] - reskh) + std::abs(fhi[j][k] - reskh));
    resasc *= std::abs(h);
    const double absh = std::abs(h);
    out.value[k] = resk[k] * h;
    double err = std::abs((resk[k] - resg[k]) * h);
    if (resasc != 0 && err != 0)
      err = resasc * std::min(1.0, std::pow(200 * err / resasc, 1.5));
    const double scaled_abs = resabs[k] * absh;
    if (scaled_abs > 1e-290) err = std::max(err, 50 * eps * scaled_abs);
    out.resabs[k] = scaled_abs;
    out.error[k] = err;
    out.worst = std::max(out.worst, err);
  }
  return out;
}

} // namespace detail

// Globally adaptive Gauss-Kronrod rule for an m-component integrand
// (m <= 8). f(x, out) writes the m component values at x. Breakpoints
// pre-split the interval so narrow interior peaks cannot be stepped over.
// Throws quadrature_nonconvergence when max_subdivisions is exhausted.
template <class F>
void adaptive_gk(F &&f, int m, double a, double b,
                 std::span<const double> breakpoints, const QuadratureConfig &cfg,
                 double *out, const char *what) {
  require(m >= 1 && m <= detail::kMaxComponents, ErrorCode::invalid_argument,
          "adaptive_gk: bad component count");
  auto cmp = [](const detail::IntervalResult &x, const detail::IntervalResult &y) {
    return x.worst < y.worst;
  };
  std::priority_queue<detail::IntervalResult, std::vector<detail::IntervalResult>,
                      decltype(cmp)>
      heap(cmp);

  std::vector<double> edges;
  edges.push_back(a);
  for (double p : breakpoints)
    if (p > a && p < b) edges.push_back(p);
  edges.push_back(b);

  std::array<double, detail::kMaxComponents> total{}, toterr{}, totabs{};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto r = detail::gk15(f, m, edges[i], edges[i + 1]);
    for (int k = 0; k < m; ++k) {
      total[k] += r.value[k];
      toterr[k] += r.error[k];
      totabs[k] += r.resabs[k];
    }
    heap.push(r);
  }

  // Convergence accepts the roundoff floor: components whose requested
  // tolerance sits below 120 eps * int|f| cannot be refined further.
  auto converged = [&]() {
    double scale = 0;
    for (int k = 0; k < m; ++k) scale = std::max(scale, std::abs(total[k]));
    for (int k = 0; k < m; ++k) {
      const double tol = std::max({cfg.abs_tol, cfg.rel_tol * std::abs(total[k]),
                                   cfg.rel_tol * 1e-2 * scale,
                                   120 * 2.220446049250313e-16 * totabs[k]});
      if (toterr[k] > tol) return false;
    }
    return true;
  };

  int splits = 0;
  while (!converged()) {
    require(splits < cfg.max_subdivisions, ErrorCode::quadrature_nonconvergence,
            std::string("adaptive quadrature failed to converge: ") + what);
    auto worst = heap.top();
    if (worst.worst <= 0) break; // remaining error sits on unsplittable intervals
    heap.pop();
    const double mid = (worst.a + worst.b) / 2;
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval collapsed to machine resolution; keep its estimate as is.
      worst.worst = 0;
      heap.push(worst);
      continue;
    }
    auto left = detail::gk15(f, m, worst.a, mid);
    auto right = detail::gk15(f, m, mid, worst.b);
    for (int k = 0; k < m; ++k) {
      total[k] += left.value[k] + right.value[k] - worst.value[k];
      toterr[k] += left.error[k] + right.error[k] - worst.error[k];
      totabs[k] += left.resabs[k] + right.resabs[k] - worst.resabs[k];
    }
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  for (int k = 0; k < m; ++k) out[k] = total[k];
}

// Scalar convenience wrapper.
template <class F>
double adaptive_gk_1(F &&f, double a, double b, std::span<const double> breakpoints,
                     const QuadratureConfig &cfg, const char *what) {
  double out = 0;
  auto wrap = [&f](double x, double *o) { o[0] = f(x); };
  adaptive_gk(wrap, 1, a, b, breakpoints, cfg, &out, what);
  return out;
}

// A polynomial in (v1, |v|^2): sum of c * v1^pv * (|v|^2)^pr2 with pv <= 2.
struct VRTerm {
  double c;
  int pv;
  int pr2;
};
using VRPoly = std::vector<VRTerm>;

// Multiply a poly by (v1 - shift).
VRPoly shift_v1(const VRPoly &poly, double shift);

// Batched evaluation of integrals int q_j(v) exp(-P_u(v)/D) dv for a set of
// polynomials q_j sharing the weight. All results carry the same log_scale
// (-min P / D). dim = 1 integrates the line directly; dim in {2,3} uses the
// radial-angular reduction of the weight.
std::vector<ShiftedIntegral> shifted_moments(const ModelParams &p, double u,
                                             const QuadratureConfig &cfg,
                                             std::span<const VRPoly> polys);

// Z as a shifted integral; equals F_0(u, D).
ShiftedIntegral partition_function(const ModelParams &p, double u,
                                   const QuadratureConfig &cfg);

// F_k(u,D) = int (v1 - v1*(u))^k exp(-P_u/D) dv for k in {0,1,2}; at u = 0
// the moment is centered at the origin (v1* is undefined there).
ShiftedIntegral centered_moment(const ModelParams &p, double u, int k,
                                const QuadratureConfig &cfg);

// I_n^N(z) (unscaled) and e^{-|z|} I_n^N(z) (scaled; safe for large z).
double angular_integral(int n, int dim, double z);
double angular_integral_scaled(int n, int dim, double z);

// E_D(r) = exp(alpha/D (r^2/2 - r^4/4) - r^2/(2D)); requires D > 0.
double radial_weight(const ModelParams &p, double r);

// Closed form of int exp(-Q(x)/D) x^beta dx, Q(x) = sum lambda_i x_i^2.
double gaussian_moment(std::span<const double> lambdas, std::span<const int> beta,
                       double noise);

// Truncation interval [lo, hi] for the line (dim = 1) or [0, hi] for the
// radial variable, chosen so the discarded exponent sits truncation_margin
// decades below the peak. Exposed for tests of tail soundness.
void truncation_bounds(const ModelParams &p, double u, const QuadratureConfig &cfg,
                       double &lo, double &hi);

} // namespace spcs
