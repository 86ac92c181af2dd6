// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: nine numbered criteria, each printing one pass/fail line
// with its runtime. Run a single criterion with `acceptance N`, or all of
// them with no argument. Exit code = number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "consistency.hpp"
#include "model.hpp"
#include "particle.hpp"
#include "quadrature.hpp"

using namespace spcs;

namespace {

struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string &what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void expect_close(double value, double target, double tol,
                    const std::string &what) {
    if (!(std::abs(value - target) <= tol)) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: got %.6g, want %.6g +- %.2g",
                    what.c_str(), value, target, tol);
      detail += buf;
    }
  }
};

// --- criterion 1: closed-form limits and their quadrature counterparts ------

void criterion_1(Checker &c) {
  const auto lc = coefficients(2.0, 1);
  c.expect_close(lc.dh_du_limit, -0.8, 1e-12, "dH/du(1,0) closed form");
  c.expect_close(lc.dh_dd_limit, -0.24, 1e-12, "dH/dD(1,0) closed form");
  c.expect_close(lc.bif_slope, -0.3, 1e-12, "du/dD(0) closed form");

  QuadratureConfig cfg;
  ModelParams p{1, 2.0, 1e-3};
  const auto pt = evaluate_point(p, 1.0, cfg, true);
  c.expect_close(pt.dh_du, -0.8, 3e-2, "dH/du at D=1e-3");
  c.expect_close(pt.dh_dd, -0.24, 3e-2, "dH/dD at D=1e-3");
  c.expect_close(-pt.dh_dd / pt.dh_du, -0.3, 3e-2, "du/dD ratio at D=1e-3");
}

// --- criterion 2: appendix moment table --------------------------------------

void criterion_2(Checker &c) {
  for (double alpha : {0.5, 1.0, 2.0, 6.0}) {
    for (int dim : {1, 2, 3}) {
      for (const auto &e : moment_table(alpha, dim)) {
        const double rel = std::abs(e.via_gaussian_moment - e.closed_form) /
                           std::abs(e.closed_form);
        if (rel > 1e-12) {
          char buf[120];
          std::snprintf(buf, sizeof(buf), "%s at alpha=%g N=%d off by %.2e",
                        e.name.c_str(), alpha, dim, rel);
          c.expect(false, buf);
        }
      }
    }
  }
}

// --- criterion 3: critical-noise limits --------------------------------------

void criterion_3(Checker &c) {
  QuadratureConfig cfg;
  const double dc_1d = critical_noise(1e-3, 1, cfg);
  c.expect_close(dc_1d, 1.0 / 3.0, 1e-2, "D_c(alpha=1e-3, dim=1)");

  double prev = 0;
  for (double alpha : {5.0, 20.0, 100.0}) {
    const double dc = critical_noise(alpha, 2, cfg);
    c.expect(dc > prev, "D_c increasing in alpha toward 1/2 (dim=2)");
    c.expect(dc < 0.5, "D_c below the Vicsek limit 1/2 (dim=2)");
    prev = dc;
  }
  c.expect(prev >= 0.45 && prev <= 0.50, "D_c(alpha=100, dim=2) in [0.45, 0.50]");
}

// --- criterion 4: bifurcation-curve shape ------------------------------------

void criterion_4(Checker &c) {
  QuadratureConfig cfg;
  double dc_by_dim[3] = {0, 0, 0};
  for (int dim : {1, 2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto curve = trace_bifurcation(2.0, dim, 1e-3, 0.8, 0.0, cfg, 1e-10);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const std::string tag = "dim=" + std::to_string(dim);
    c.expect(secs < 120, tag + ": runtime under 2 min per curve");
    c.expect(!curve.samples.empty(), tag + ": curve nonempty");
    if (curve.samples.empty()) continue;
    c.expect_close(curve.samples.front().u, 1.0, 2e-2, tag + ": u(1e-3) near 1");
    bool decreasing = true;
    for (std::size_t i = 1; i < curve.samples.size(); ++i)
      decreasing = decreasing && curve.samples[i].u < curve.samples[i - 1].u;
    c.expect(decreasing, tag + ": u(D) strictly decreasing");
    c.expect(std::abs(curve.samples.back().dh_du) < 1e-2,
             tag + ": |dH/du| < 1e-2 at the last sample before D_c");
    c.expect(std::isfinite(curve.d_critical), tag + ": D_c detected");
    dc_by_dim[dim] = curve.d_critical;
  }
  c.expect(dc_by_dim[2] < dc_by_dim[1],
           "D_c(dim=2) below D_c(dim=1) at alpha = 2");
}

// --- criterion 5: integration-by-parts identity and large-D monotonicity -----

void criterion_5(Checker &c) {
  QuadratureConfig cfg;
  for (double alpha : {1.0, 2.0, 6.0}) {
    for (double u : {0.2, 0.8, 1.2}) {
      for (double D : {0.05, 0.3, 1.0}) {
        ModelParams p{1, alpha, D};
        const auto [direct, parts] = zh_identity(p, u, cfg);
        const double rel = std::abs(direct - parts) /
                           std::max(std::abs(direct), std::abs(parts));
        if (rel > 1e-8) {
          char buf[120];
          std::snprintf(buf, sizeof(buf),
                        "Z*H identity off by %.2e at (%g, %g, %g)", rel, alpha,
                        u, D);
          c.expect(false, buf);
        }
      }
    }
  }
  for (double alpha : {1.0, 2.0, 6.0}) {
    ModelParams p{1, alpha, 10.0};
    for (int i = 1; i <= 64; ++i) {
      const double u = 3.0 * i / 64;
      if (!(evaluate_dH_du(p, u, cfg) < 0)) {
        char buf[100];
        std::snprintf(buf, sizeof(buf), "dH/du >= 0 at alpha=%g, u=%g, D=10",
                      alpha, u);
        c.expect(false, buf);
        break;
      }
    }
  }
}

// --- criterion 6: Laplace convergence order ----------------------------------

void criterion_6(Checker &c) {
  QuadratureConfig cfg;
  for (int dim : {1, 2}) {
    const auto rep = expansion_check(2.0, dim, 1.0, 4, cfg);
    for (int k = 0; k < 3; ++k) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "F%d residual slope (dim=%d)", k, dim);
      c.expect_close(rep.slope[k], 1.0, 0.1, buf);
    }
  }
}

// --- criterion 7: particle stability at desk scale ----------------------------

void criterion_7(Checker &c) {
  QuadratureConfig qcfg;
  const double dc = critical_noise(3.0, 1, qcfg);

  SimConfig cfg;
  cfg.params = {1, 3.0, 0.25 * dc};
  cfg.n_particles = 2000;
  cfg.dt = 0.01;
  cfg.t_end = 200;
  cfg.n_runs = 10;
  cfg.seed = 20260810;
  cfg.record_every = 50;
  cfg.init = {InitLaw::Kind::gaussian, {0.5, 0, 0}, 1.0};

  const auto ordered = run_ensemble(cfg);
  const auto root = find_positive_root(cfg.params, qcfg);
  c.expect(root.has_value(), "positive root exists at D = 0.25 D_c");
  if (root) {
    const double term = ordered.terminal_mean()[0];
    const double tol = std::max(0.05, 3 * ordered.terminal_se1());
    c.expect_close(term, *root, tol, "terminal mean velocity vs u(D)");
  }

  cfg.params.noise = 1.5 * dc;
  const auto disordered = run_ensemble(cfg);
  c.expect(std::abs(disordered.terminal_mean()[0]) < 0.05,
           "terminal |mean velocity| < 0.05 at D = 1.5 D_c");
}

// --- criterion 8: histogram match and double peaks -----------------------------

void criterion_8(Checker &c) {
  QuadratureConfig qcfg;
  // The criterion pins runs, particles and t_end; dt is chosen small enough
  // that the EM weak bias stays inside the L1 budget near D_c.
  const struct {
    double noise, dt;
  } cases[2] = {{0.1, 0.01}, {0.5, 0.005}};
  for (const auto &[D, dt] : cases) {
    SimConfig cfg;
    cfg.params = {1, 2.0, D};
    cfg.n_particles = 5000;
    cfg.dt = dt;
    cfg.t_end = 200;
    cfg.n_runs = 20;
    cfg.seed = 777;
    cfg.record_every = 200;
    const auto trace = run_ensemble(cfg);
    const auto root = find_positive_root(cfg.params, qcfg);
    const double u = root.value_or(0.0);
    const double l1 = histogram_vs_analytic(trace, cfg.params, u, qcfg);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "L1 distance at D=%g", D);
    c.expect(l1 < 0.05, std::string(buf) + ": " + std::to_string(l1));
  }

  // alpha = 6, D slightly above D_c: u = 0 but the density keeps double
  // peaks near +-1.
  const double dc6 = critical_noise(6.0, 1, qcfg);
  SimConfig cfg;
  cfg.params = {1, 6.0, 1.08 * dc6};
  cfg.n_particles = 5000;
  cfg.dt = 0.01;
  cfg.t_end = 200;
  cfg.n_runs = 10;
  cfg.seed = 99;
  cfg.record_every = 200;
  const auto trace = run_ensemble(cfg);
  c.expect(!find_positive_root(cfg.params, qcfg).has_value(),
           "u(D) = 0 just above D_c at alpha = 6");

  // smoothed local maxima of the pooled histogram
  const int nb = trace.hist_bins;
  const double h = (trace.hist_hi - trace.hist_lo) / nb;
  std::vector<double> sm(nb, 0.0);
  for (int b = 2; b < nb - 2; ++b)
    for (int j = -2; j <= 2; ++j) sm[b] += trace.hist_mass[b + j] / 5;
  double peak_pos = 0, peak_neg = 0, mid = 0, x_pos = 0, x_neg = 0;
  for (int b = 0; b < nb; ++b) {
    const double x = trace.hist_lo + (b + 0.5) * h;
    if (x > 0.5 && x < 1.5 && sm[b] > peak_pos) { peak_pos = sm[b]; x_pos = x; }
    if (x < -0.5 && x > -1.5 && sm[b] > peak_neg) { peak_neg = sm[b]; x_neg = x; }
    if (std::abs(x) < 0.25) mid = std::max(mid, sm[b]);
  }
  c.expect(x_pos > 0.7 && x_pos < 1.15, "positive peak near +1");
  c.expect(x_neg < -0.7 && x_neg > -1.15, "negative peak near -1");
  c.expect(mid < 0.75 * std::min(peak_pos, peak_neg),
           "central dip between the two peaks");
}

// --- criterion 9: determinism and derivative correctness -----------------------

void criterion_9(Checker &c) {
  for (int dim : {1, 2}) {
    SimConfig cfg;
    cfg.params = {dim, 2.0, 0.2};
    cfg.n_particles = 400;
    cfg.t_end = 10;
    cfg.n_runs = 4;
    cfg.seed = 5150;
    cfg.record_every = 20;
    cfg.threads = 1;
    const auto a = run_ensemble(cfg);
    cfg.threads = 4;
    const auto b = run_ensemble(cfg);
    const bool same_mean =
        std::memcmp(a.mean_velocity.data(), b.mean_velocity.data(),
                    a.mean_velocity.size() * sizeof(a.mean_velocity[0])) == 0;
    const bool same_hist =
        a.hist_mass.size() == b.hist_mass.size() &&
        std::memcmp(a.hist_mass.data(), b.hist_mass.data(),
                    a.hist_mass.size() * sizeof(double)) == 0;
    const bool same_fe =
        a.free_energy.size() == b.free_energy.size() &&
        std::memcmp(a.free_energy.data(), b.free_energy.data(),
                    a.free_energy.size() * sizeof(double)) == 0;
    c.expect(same_mean && same_hist && same_fe,
             "bit-identical traces across thread counts (dim=" +
                 std::to_string(dim) + ")");
  }

  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  const struct {
    int dim;
    double alpha, u, noise;
  } pts[5] = {{1, 2.0, 0.5, 0.3},
              {1, 2.0, 0.7, 0.3},
              {1, 1.0, 0.9, 0.2},
              {2, 6.0, 0.6, 0.4},
              {2, 2.0, 1.2, 0.25}};
  for (const auto &q : pts) {
    ModelParams p{q.dim, q.alpha, q.noise};
    const auto pt = evaluate_point(p, q.u, cfg, true);
    const double h = 1e-5;
    const double fd_u =
        (evaluate_H(p, q.u + h, cfg) - evaluate_H(p, q.u - h, cfg)) / (2 * h);
    ModelParams ph = p, pl = p;
    ph.noise += h;
    pl.noise -= h;
    const double fd_d =
        (evaluate_H(ph, q.u, cfg) - evaluate_H(pl, q.u, cfg)) / (2 * h);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "dH/du FD at (%d, %g, %g, %g)", q.dim,
                  q.alpha, q.u, q.noise);
    c.expect(std::abs(pt.dh_du - fd_u) <= 1e-5 * std::abs(fd_u), buf);
    std::snprintf(buf, sizeof(buf), "dH/dD FD at (%d, %g, %g, %g)", q.dim,
                  q.alpha, q.u, q.noise);
    c.expect(std::abs(pt.dh_dd - fd_d) <= 1e-5 * std::abs(fd_d), buf);
  }
}

struct Criterion {
  int id;
  const char *name;
  double budget_s;
  std::function<void(Checker &)> body;
};

const std::vector<Criterion> &criteria() {
  static const std::vector<Criterion> all = {
      {1, "closed-form limits at alpha=2, N=1 vs quadrature at D=1e-3", 10,
       criterion_1},
      {2, "appendix Gaussian moment table to 1e-12", 1, criterion_2},
      {3, "critical-noise limits 1/3 (1-D) and 1/2 (2-D)", 300, criterion_3},
      {4, "bifurcation-curve shape and dimensional ordering", 240, criterion_4},
      {5, "integration-by-parts identity and large-D monotonicity", 60,
       criterion_5},
      {6, "Laplace convergence order O(D) for F0, F1, F2", 60, criterion_6},
      {7, "particle stability across the transition (desk scale)", 300,
       criterion_7},
      {8, "histogram match and double-peak structure", 300, criterion_8},
      {9, "determinism and derivative correctness", 60, criterion_9},
  };
  return all;
}

int run_criterion(const Criterion &cr) {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cr.body(c);
  } catch (const std::exception &e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs > cr.budget_s) {
    c.ok = false;
    c.detail += (c.detail.empty() ? "" : "; ") + std::string("over budget");
  }
  std::printf("[%s] criterion %d: %s (%.1f s%s%s)\n", c.ok ? "PASS" : "FAIL",
              cr.id, cr.name, secs, c.detail.empty() ? "" : " -- ",
              c.detail.c_str());
  std::fflush(stdout);
  return c.ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  int failures = 0;
  if (argc > 1) {
    const int want = std::atoi(argv[1]);
    for (const auto &cr : criteria())
      if (cr.id == want) return run_criterion(cr);
    std::fprintf(stderr, "no such criterion: %s\n", argv[1]);
    return 64;
  }
  for (const auto &cr : criteria()) failures += run_criterion(cr);
  return failures;
}
