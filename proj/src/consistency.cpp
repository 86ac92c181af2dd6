// SPDX-License-Identifier: Apache-2.0
#include "consistency.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

namespace spcs {

namespace {

constexpr double kRootLo = 1e-4;
constexpr double kRootHi = 3.0;
constexpr int kScanPoints = 64;

VRPoly poly_one() { return {{1.0, 0, 0}}; }

VRPoly poly_excess_potential(const ModelParams &p, double u, double a0) {
  // P_u - a0 as a polynomial in (v1, |v|^2).
  return {{p.alpha / 4, 0, 2}, {(1 - p.alpha) / 2, 0, 1}, {-u, 1, 0}, {-a0, 0, 0}};
}

struct PointMoments {
  double f0 = 0, f1 = 0, f2 = 0, ma = 0, mb = 0;
  double vstar = 0;
};

PointMoments moments_positive(const ModelParams &p, double u,
                              const QuadratureConfig &cfg, bool want_dd) {
  PointMoments m;
  const auto dec = positive_minimum(p, u);
  m.vstar = dec.vstar;
  std::vector<VRPoly> polys;
  polys.push_back(poly_one());
  polys.push_back(shift_v1(poly_one(), dec.vstar));
  polys.push_back(shift_v1(polys[1], dec.vstar));
  if (want_dd) {
    const VRPoly excess = poly_excess_potential(p, u, dec.a0);
    polys.push_back(shift_v1(excess, dec.vstar));
    polys.push_back(excess);
  }
  const auto vals = shifted_moments(p, u, cfg, polys);
  m.f0 = vals[0].mantissa;
  m.f1 = vals[1].mantissa;
  m.f2 = vals[2].mantissa;
  if (want_dd) {
    m.ma = vals[3].mantissa;
    m.mb = vals[4].mantissa;
  }
  return m;
}

} // namespace

ConsistencyPoint evaluate_point(const ModelParams &p, double u,
                                const QuadratureConfig &cfg, bool want_dh_dd) {
  p.validate();
  require(std::isfinite(u) && u >= 0, ErrorCode::invalid_argument,
          "evaluate_point requires u >= 0");
  ConsistencyPoint pt;
  pt.u = u;
  pt.noise = p.noise;
  if (u == 0) {
    // Symmetric branch: H vanishes identically; dH/du from origin-centered
    // moments (F1(0) = 0 by parity).
    const std::vector<VRPoly> polys{poly_one(), {{1.0, 2, 0}}};
    const auto vals = shifted_moments(p, 0.0, cfg, polys);
    pt.h = 0.0;
    pt.dh_du = vals[1].mantissa / (p.noise * vals[0].mantissa) - 1;
    pt.has_dh_dd = false;
    return pt;
  }
  const auto m = moments_positive(p, u, cfg, want_dh_dd);
  pt.h = m.f1 / m.f0 + (m.vstar - u);
  pt.dh_du = (m.f0 * m.f2 - m.f1 * m.f1) / (p.noise * m.f0 * m.f0) - 1;
  if (want_dh_dd) {
    pt.dh_dd = (m.f0 * m.ma - m.f1 * m.mb) /
               (p.noise * p.noise * m.f0 * m.f0);
    pt.has_dh_dd = true;
  }
  return pt;
}

double evaluate_H(const ModelParams &p, double u, const QuadratureConfig &cfg) {
  if (u == 0) {
    p.validate();
    return 0.0;
  }
  const auto m = moments_positive(p, u, cfg, false);
  return m.f1 / m.f0 + (m.vstar - u);
}

double evaluate_dH_du(const ModelParams &p, double u, const QuadratureConfig &cfg) {
  return evaluate_point(p, u, cfg, false).dh_du;
}

double evaluate_dH_dD(const ModelParams &p, double u, const QuadratureConfig &cfg) {
  require(u > 0, ErrorCode::invalid_argument, "evaluate_dH_dD requires u > 0");
  return evaluate_point(p, u, cfg, true).dh_dd;
}

std::pair<double, double> zh_identity(const ModelParams &p, double u,
                                      const QuadratureConfig &cfg) {
  p.validate();
  require(u >= 0, ErrorCode::invalid_argument, "zh_identity requires u >= 0");
  const std::vector<VRPoly> polys{
      {{1.0, 1, 0}, {-u, 0, 0}},            // (v1 - u)
      {{-p.alpha, 1, 1}, {p.alpha, 1, 0}}}; // -alpha v1 (|v|^2 - 1)
  const auto vals = shifted_moments(p, u, cfg, polys);
  return {vals[0].mantissa, vals[1].mantissa};
}

std::optional<double> find_positive_root(const ModelParams &p,
                                         const QuadratureConfig &cfg,
                                         double root_tol) {
  p.validate();
  require(root_tol > 0, ErrorCode::invalid_argument, "root_tol must be positive");

  std::array<double, kScanPoints> us, hs;
  for (int i = 0; i < kScanPoints; ++i) {
    us[i] = kRootLo + (kRootHi - kRootLo) * i / (kScanPoints - 1);
    hs[i] = evaluate_H(p, us[i], cfg);
  }
  std::vector<std::pair<double, double>> brackets;
  for (int i = 0; i + 1 < kScanPoints; ++i) {
    if (hs[i] == 0) return us[i];
    if ((hs[i] > 0) != (hs[i + 1] > 0)) brackets.push_back({us[i], us[i + 1]});
  }
  if (brackets.empty()) {
    const bool all_negative = std::all_of(hs.begin(), hs.end(),
                                          [](double h) { return h <= 0; });
    if (all_negative) return std::nullopt; // disordered regime
    fail(ErrorCode::no_sign_change,
         "H positive at the scan boundary u = 3; bracketing assumption violated");
  }
  if (brackets.size() > 1) {
    std::ostringstream msg;
    msg << "multiple sign changes of H detected:";
    for (auto [a, b] : brackets) msg << " (" << a << ", " << b << ")";
    fail(ErrorCode::ambiguous_bracket, msg.str());
  }

  auto [a, b] = brackets.front();
  double ha = evaluate_H(p, a, cfg);
  double x = (a + b) / 2;
  for (int it = 0; it < 100; ++it) {
    const auto pt = evaluate_point(p, x, cfg, false);
    if (std::abs(pt.h) < root_tol) return x;
    if ((pt.h > 0) == (ha > 0))
      a = x;
    else
      b = x;
    double next = x - pt.h / pt.dh_du;
    if (!(next > a && next < b)) next = (a + b) / 2;
    if (next == x) return x; // interval at machine resolution
    x = next;
  }
  fail(ErrorCode::internal, "root refinement failed to meet root_tol");
}

double critical_noise(double alpha, int dim, const QuadratureConfig &cfg) {
  ModelParams p{dim, alpha, 0.1};
  p.validate();
  auto g = [&](double noise) {
    ModelParams q{dim, alpha, noise};
    return evaluate_point(q, 0.0, cfg, false).dh_du;
  };
  double lo = 1e-3;
  int guard = 0;
  while (g(lo) <= 0) {
    lo /= 4;
    require(lo >= 1e-6, ErrorCode::no_sign_change,
            "dH/du(0, D) not positive down to the quadrature floor");
    require(++guard < 16, ErrorCode::no_sign_change, "interval search failed");
  }
  double hi = std::max(1.0, 2 * lo);
  guard = 0;
  while (g(hi) >= 0) {
    hi *= 2;
    require(hi <= 1024, ErrorCode::no_sign_change,
            "dH/du(0, D) still positive at D = 1024");
    require(++guard < 24, ErrorCode::no_sign_change, "interval search failed");
  }
  while (hi - lo > 1e-8) {
    const double mid = (lo + hi) / 2;
    if (g(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

namespace {

// Warm-started bracket search around the previous root.
std::optional<double> local_root(const ModelParams &p, const QuadratureConfig &cfg,
                                 double root_tol, double u_prev) {
  double lo = std::max(kRootLo, u_prev - 0.1);
  double hi = std::min(kRootHi, u_prev + 0.1);
  double hlo = evaluate_H(p, lo, cfg);
  double hhi = evaluate_H(p, hi, cfg);
  int guard = 0;
  while (hlo <= 0 && lo > kRootLo) {
    lo = std::max(kRootLo, lo - 0.2);
    hlo = evaluate_H(p, lo, cfg);
    if (++guard > 20) break;
  }
  guard = 0;
  while (hhi >= 0 && hi < kRootHi) {
    hi = std::min(kRootHi, hi + 0.2);
    hhi = evaluate_H(p, hi, cfg);
    if (++guard > 20) break;
  }
  if (hlo <= 0 || hhi >= 0) return find_positive_root(p, cfg, root_tol);

  double a = lo, b = hi, x = u_prev;
  if (!(x > a && x < b)) x = (a + b) / 2;
  for (int it = 0; it < 100; ++it) {
    const auto pt = evaluate_point(p, x, cfg, false);
    if (std::abs(pt.h) < root_tol) return x;
    if (pt.h > 0)
      a = x;
    else
      b = x;
    double next = x - pt.h / pt.dh_du;
    if (!(next > a && next < b)) next = (a + b) / 2;
    if (next == x) return x;
    x = next;
  }
  fail(ErrorCode::internal, "warm-started root refinement failed");
}

} // namespace

BifurcationCurve trace_bifurcation(double alpha, int dim, double d_min,
                                   double d_max, double d_step,
                                   const QuadratureConfig &cfg, double root_tol) {
  require(d_min >= 1e-4, ErrorCode::invalid_argument,
          "trace_bifurcation requires d_min >= 1e-4");
  require(d_max > d_min, ErrorCode::invalid_argument, "empty D range");
  if (d_step <= 0) d_step = (d_max - d_min) / 80;

  BifurcationCurve curve;
  curve.alpha = alpha;
  curve.dim = dim;
  curve.d_critical = std::numeric_limits<double>::quiet_NaN();

  std::optional<double> u_prev;
  double D = d_min;
  double step = d_step;
  const double min_step = d_step / 1024;
  bool merged = false;

  while (D <= d_max + 1e-12) {
    ModelParams p{dim, alpha, D};
    std::optional<double> root;
    try {
      root = u_prev ? local_root(p, cfg, root_tol, *u_prev)
                    : find_positive_root(p, cfg, root_tol);
    } catch (const Error &e) {
      std::ostringstream msg;
      msg << "continuation failed at D = " << D << ": " << e.what();
      fail(e.code(), msg.str());
    }
    if (root) {
      if (u_prev && std::abs(*root - *u_prev) > 0.1 && step > min_step) {
        D -= step;   // roll back and retry with a finer step
        step /= 2;
        D += step;
        continue;
      }
      const auto pt = evaluate_point(p, *root, cfg, false);
      curve.samples.push_back({D, *root, pt.dh_du});
      u_prev = root;
      D += step;
    } else {
      merged = true;
      // Root vanished inside (last sample, D): bisect on existence and keep
      // extending the curve toward the merge point, so the tail records the
      // perpendicular approach dH/du(u(D), D) -> 0.
      if (u_prev) {
        double lo = curve.samples.back().noise, hi = D;
        while (hi - lo > 1e-6) {
          const double mid = (lo + hi) / 2;
          ModelParams pm{dim, alpha, mid};
          const auto r = local_root(pm, cfg, root_tol, *u_prev);
          if (r) {
            const auto pt = evaluate_point(pm, *r, cfg, false);
            curve.samples.push_back({mid, *r, pt.dh_du});
            u_prev = r;
            lo = mid;
          } else {
            hi = mid;
          }
        }
      }
      break;
    }
  }

  if (merged) {
    // The derivative test is the clean definition of the merge point; the
    // curve vanishes tangentially in u (perpendicular intersection).
    curve.d_critical = critical_noise(alpha, dim, cfg);
  } else if (!curve.samples.empty()) {
    // Curve still alive at d_max; flag D_c as not reached only if dH/du(0)
    // stays positive there.
    ModelParams p{dim, alpha, d_max};
    if (evaluate_point(p, 0.0, cfg, false).dh_du < 0)
      curve.d_critical = critical_noise(alpha, dim, cfg);
  }

  const std::size_t nfit = std::min<std::size_t>(5, curve.samples.size());
  if (nfit >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < nfit; ++i) {
      sx += curve.samples[i].noise;
      sy += curve.samples[i].u;
      sxx += curve.samples[i].noise * curve.samples[i].noise;
      sxy += curve.samples[i].noise * curve.samples[i].u;
    }
    const double n = static_cast<double>(nfit);
    curve.slope_at_zero = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return curve;
}

PhaseDiagram phase_scan(std::span<const double> alphas,
                        std::span<const double> noises, int dim,
                        const QuadratureConfig &cfg, int threads) {
  require(!alphas.empty() && !noises.empty(), ErrorCode::invalid_argument,
          "phase_scan: empty grid");
  require(std::is_sorted(alphas.begin(), alphas.end()) &&
              std::is_sorted(noises.begin(), noises.end()),
          ErrorCode::invalid_argument, "phase_scan: grids must be sorted");

  PhaseDiagram pd;
  pd.grid.resize(alphas.size() * noises.size());

  auto scan_row = [&](std::size_t ai) {
    for (std::size_t di = 0; di < noises.size(); ++di) {
      PhasePoint &pt = pd.grid[ai * noises.size() + di];
      pt.alpha = alphas[ai];
      pt.noise = noises[di];
      try {
        ModelParams p{dim, alphas[ai], noises[di]};
        pt.n_states = find_positive_root(p, cfg) ? 2 : 1;
        pt.ok = true;
        pt.status = ErrorCode::internal;
      } catch (const Error &e) {
        pt.ok = false;
        pt.n_states = 0;
        pt.status = e.code();
      }
    }
  };

  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, alphas.size());
  if (n_threads <= 1) {
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) scan_row(ai);
  } else {
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < n_threads; ++t)
      jobs.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t ai = next.fetch_add(1); ai < alphas.size();
             ai = next.fetch_add(1))
          scan_row(ai);
      }));
    for (auto &j : jobs) j.get();
  }

  // Boundary continuation along alpha (sequential: each D_c warm-starts the
  // next bisection interval).
  std::optional<double> prev_dc;
  for (double a : alphas) {
    double dc;
    if (!prev_dc) {
      dc = critical_noise(a, dim, cfg);
    } else {
      auto g = [&](double noise) {
        ModelParams q{dim, a, noise};
        return evaluate_point(q, 0.0, cfg, false).dh_du;
      };
      double lo = *prev_dc, hi = *prev_dc;
      int guard = 0;
      while (g(lo) <= 0 && lo > 1e-6) { lo *= 0.7; ++guard; if (guard > 60) break; }
      guard = 0;
      while (g(hi) >= 0 && hi < 1024) { hi *= 1.3; ++guard; if (guard > 60) break; }
      if (g(lo) <= 0 || g(hi) >= 0) {
        dc = critical_noise(a, dim, cfg);
      } else {
        while (hi - lo > 1e-8) {
          const double mid = (lo + hi) / 2;
          if (g(mid) > 0) lo = mid; else hi = mid;
        }
        dc = (lo + hi) / 2;
      }
    }
    pd.boundary.push_back({a, dc});
    prev_dc = dc;
  }
  return pd;
}

} // namespace spcs
