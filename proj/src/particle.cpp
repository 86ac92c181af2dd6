// SPDX-License-Identifier: Apache-2.0
#include "particle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "philox.hpp"

namespace spcs {

void SimConfig::validate() const {
  params.validate();
  require(n_particles >= 1, ErrorCode::invalid_argument, "n_particles >= 1");
  require(dt > 0 && std::isfinite(dt), ErrorCode::invalid_argument, "dt > 0");
  require(t_end >= dt, ErrorCode::invalid_argument, "t_end >= dt");
  require(n_runs >= 1, ErrorCode::invalid_argument, "n_runs >= 1");
  require(record_every >= 1, ErrorCode::invalid_argument, "record_every >= 1");
  require(hist_bins >= 2 && hist_hi > hist_lo, ErrorCode::invalid_argument,
          "bad histogram axis");
  require(init.sigma >= 0, ErrorCode::invalid_argument, "init sigma >= 0");
  double cells = 1;
  for (int a = 0; a < params.dim; ++a) cells *= hist_bins;
  require(cells <= double(1 << 26), ErrorCode::invalid_argument,
          "histogram grid too large");
}

double em_step(const ModelParams &p, double dt, std::span<double> velocities,
               std::span<const double> noise_increments) {
  const int dim = p.dim;
  const std::size_t m = velocities.size() / dim;
  require(velocities.size() == m * static_cast<std::size_t>(dim) &&
              noise_increments.size() == velocities.size(),
          ErrorCode::invalid_argument, "em_step: array size mismatch");

  std::array<double, 3> ubar{};
  for (std::size_t i = 0; i < m; ++i)
    for (int c = 0; c < dim; ++c) ubar[c] += velocities[i * dim + c];
  for (int c = 0; c < dim; ++c) ubar[c] /= static_cast<double>(m);

  const double s2d = std::sqrt(2 * p.noise);
  double maxsq = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double *v = &velocities[i * dim];
    const double *dw = &noise_increments[i * dim];
    double v2 = 0;
    for (int c = 0; c < dim; ++c) v2 += v[c] * v[c];
    const double a = p.alpha * (v2 - 1);
    double w2 = 0;
    for (int c = 0; c < dim; ++c) {
      v[c] = v[c] - (a * v[c] + (v[c] - ubar[c])) * dt + s2d * dw[c];
      w2 += v[c] * v[c];
    }
    maxsq = std::max(maxsq, w2);
  }
  return maxsq;
}

namespace {

struct RunResult {
  bool ok = true;
  std::vector<std::array<double, 3>> means;       // per snapshot
  std::vector<std::vector<uint32_t>> counts_1d;   // per snapshot (dim = 1)
  std::vector<uint32_t> final_counts;             // final snapshot, all dims
};

void bin_counts(const SimConfig &cfg, std::span<const double> vel,
                std::vector<uint32_t> &counts) {
  const int dim = cfg.params.dim;
  const std::size_t m = vel.size() / dim;
  const double h = (cfg.hist_hi - cfg.hist_lo) / cfg.hist_bins;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t flat = 0;
    bool in = true;
    for (int c = 0; c < dim; ++c) {
      const double x = vel[i * dim + c];
      const int b = static_cast<int>(std::floor((x - cfg.hist_lo) / h));
      if (b < 0 || b >= cfg.hist_bins) {
        in = false;
        break;
      }
      flat = flat * cfg.hist_bins + static_cast<std::size_t>(b);
    }
    if (in) ++counts[flat];
  }
}

RunResult simulate_run(const SimConfig &cfg, int run,
                       const std::vector<int> &snapshot_steps) {
  const int dim = cfg.params.dim;
  const std::size_t m = static_cast<std::size_t>(cfg.n_particles);
  const NoiseStream stream(cfg.seed, static_cast<uint64_t>(run));

  std::vector<double> vel(m * dim);
  for (std::size_t i = 0; i < m; ++i) {
    double z[4];
    stream.normal_pair(static_cast<uint32_t>(i), 0, 1, z);
    stream.normal_pair(static_cast<uint32_t>(i), 1, 1, z + 2);
    for (int c = 0; c < dim; ++c) {
      const double xi = z[c];
      vel[i * dim + c] = cfg.init.kind == InitLaw::Kind::gaussian
                             ? cfg.init.mean[c] + cfg.init.sigma * xi
                             : cfg.init.mean[c];
    }
  }

  const int nsteps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  const double sqrt_dt = std::sqrt(cfg.dt);
  std::vector<double> noise(m * dim);
  std::vector<double> carry(dim == 1 ? m : 0);

  RunResult out;
  const std::size_t cells = [&] {
    std::size_t c = 1;
    for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(cfg.hist_bins);
    return c;
  }();

  std::size_t snap_idx = 0;
  auto record = [&](int step) {
    std::array<double, 3> mean{};
    for (std::size_t i = 0; i < m; ++i)
      for (int c = 0; c < dim; ++c) mean[c] += vel[i * dim + c];
    for (int c = 0; c < dim; ++c) mean[c] /= static_cast<double>(m);
    out.means.push_back(mean);
    if (dim == 1) {
      out.counts_1d.emplace_back(cells, 0u);
      bin_counts(cfg, vel, out.counts_1d.back());
    }
    if (step == nsteps) {
      if (dim == 1) {
        out.final_counts = out.counts_1d.back();
      } else {
        out.final_counts.assign(cells, 0u);
        bin_counts(cfg, vel, out.final_counts);
      }
    }
  };

  if (!snapshot_steps.empty() && snapshot_steps[0] == 0) {
    record(0);
    snap_idx = 1;
  }

  for (int s = 0; s < nsteps; ++s) {
    if (dim == 1) {
      if (s % 2 == 0) {
        for (std::size_t i = 0; i < m; ++i) {
          double z[2];
          stream.normal_pair(static_cast<uint32_t>(i),
                             static_cast<uint64_t>(s / 2), 0, z);
          noise[i] = sqrt_dt * z[0];
          carry[i] = z[1];
        }
      } else {
        for (std::size_t i = 0; i < m; ++i) noise[i] = sqrt_dt * carry[i];
      }
    } else if (dim == 2) {
      for (std::size_t i = 0; i < m; ++i) {
        double z[2];
        stream.normal_pair(static_cast<uint32_t>(i), static_cast<uint64_t>(s), 0, z);
        noise[i * 2] = sqrt_dt * z[0];
        noise[i * 2 + 1] = sqrt_dt * z[1];
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        double z[4];
        stream.normal_pair(static_cast<uint32_t>(i),
                           static_cast<uint64_t>(2 * s), 0, z);
        stream.normal_pair(static_cast<uint32_t>(i),
                           static_cast<uint64_t>(2 * s) + 1, 0, z + 2);
        for (int c = 0; c < 3; ++c) noise[i * 3 + c] = sqrt_dt * z[c];
      }
    }

    const double maxsq = em_step(cfg.params, cfg.dt, vel, noise);
    if (maxsq > 100.0) { // blow-up guard: |v| exceeded 10
      out.ok = false;
      return out;
    }
    if (snap_idx < snapshot_steps.size() && snapshot_steps[snap_idx] == s + 1) {
      record(s + 1);
      ++snap_idx;
    }
  }
  return out;
}

} // namespace

ObservableTrace run_ensemble(const SimConfig &cfg) {
  cfg.validate();
  const int dim = cfg.params.dim;
  const int nsteps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  require(nsteps >= 1, ErrorCode::invalid_argument, "no steps to run");

  std::vector<int> snapshot_steps;
  for (int s = 0; s <= nsteps; s += cfg.record_every) snapshot_steps.push_back(s);
  if (snapshot_steps.back() != nsteps) snapshot_steps.push_back(nsteps);

  std::vector<RunResult> results(cfg.n_runs);
  unsigned n_threads = cfg.threads > 0
                           ? static_cast<unsigned>(cfg.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cfg.n_runs));
  if (n_threads <= 1) {
    for (int r = 0; r < cfg.n_runs; ++r)
      results[r] = simulate_run(cfg, r, snapshot_steps);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < n_threads; ++t)
      jobs.push_back(std::async(std::launch::async, [&]() {
        for (int r = next.fetch_add(1); r < cfg.n_runs; r = next.fetch_add(1))
          results[r] = simulate_run(cfg, r, snapshot_steps);
      }));
    for (auto &j : jobs) j.get();
  }

  ObservableTrace trace;
  trace.dim = dim;
  trace.n_runs = cfg.n_runs;
  trace.hist_bins = cfg.hist_bins;
  trace.hist_lo = cfg.hist_lo;
  trace.hist_hi = cfg.hist_hi;
  for (int s : snapshot_steps) trace.times.push_back(s * cfg.dt);

  int ok_runs = 0;
  for (const auto &r : results) {
    trace.run_ok.push_back(r.ok ? 1 : 0);
    trace.per_run_mean.push_back(r.means);
    if (r.ok) ++ok_runs;
  }
  trace.runs_completed = ok_runs;
  require(ok_runs > 0, ErrorCode::blowup, "all runs hit the |v| > 10 guard");

  const std::size_t n_snap = snapshot_steps.size();
  trace.mean_velocity.assign(n_snap, {});
  for (std::size_t s = 0; s < n_snap; ++s) {
    for (int r = 0; r < cfg.n_runs; ++r) {
      if (!results[r].ok) continue;
      for (int c = 0; c < dim; ++c)
        trace.mean_velocity[s][c] += results[r].means[s][c];
    }
    for (int c = 0; c < dim; ++c) trace.mean_velocity[s][c] /= ok_runs;
  }

  // Pooled final histogram (integer counts merge order-independently).
  std::size_t cells = 1;
  for (int a = 0; a < dim; ++a) cells *= static_cast<std::size_t>(cfg.hist_bins);
  std::vector<uint64_t> pooled(cells, 0);
  for (const auto &r : results) {
    if (!r.ok) continue;
    for (std::size_t i = 0; i < cells; ++i) pooled[i] += r.final_counts[i];
  }
  uint64_t total = 0;
  for (uint64_t c : pooled) total += c;
  require(total > 0, ErrorCode::internal, "final histogram is empty");
  trace.hist_mass.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
    trace.hist_mass[i] = static_cast<double>(pooled[i]) / static_cast<double>(total);

  // Free-energy trace from the pooled per-snapshot histogram (1-D ensembles).
  if (dim == 1) {
    GridDensity g;
    g.dim = 1;
    g.lo[0] = cfg.hist_lo;
    g.hi[0] = cfg.hist_hi;
    g.bins[0] = cfg.hist_bins;
    g.mass.resize(cells);
    for (std::size_t s = 0; s < n_snap; ++s) {
      std::vector<uint64_t> snap(cells, 0);
      for (const auto &r : results) {
        if (!r.ok) continue;
        for (std::size_t i = 0; i < cells; ++i) snap[i] += r.counts_1d[s][i];
      }
      uint64_t tot = 0;
      for (uint64_t c : snap) tot += c;
      if (tot == 0) {
        trace.free_energy.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      for (std::size_t i = 0; i < cells; ++i)
        g.mass[i] = static_cast<double>(snap[i]) / static_cast<double>(tot);
      trace.free_energy.push_back(free_energy(cfg.params, g));
    }
  }
  return trace;
}

std::array<double, 3> ObservableTrace::terminal_mean() const {
  const std::size_t n = times.size();
  const std::size_t w = std::max<std::size_t>(1, n / 10);
  std::array<double, 3> mean{};
  int n_ok = 0;
  for (std::size_t r = 0; r < per_run_mean.size(); ++r) {
    if (!run_ok[r]) continue;
    ++n_ok;
    for (std::size_t s = n - w; s < n; ++s)
      for (int c = 0; c < dim; ++c)
        mean[c] += per_run_mean[r][s][c] / static_cast<double>(w);
  }
  for (int c = 0; c < dim; ++c) mean[c] /= std::max(1, n_ok);
  return mean;
}

double ObservableTrace::terminal_se1() const {
  const std::size_t n = times.size();
  const std::size_t w = std::max<std::size_t>(1, n / 10);
  std::vector<double> terms;
  for (std::size_t r = 0; r < per_run_mean.size(); ++r) {
    if (!run_ok[r]) continue;
    double t = 0;
    for (std::size_t s = n - w; s < n; ++s) t += per_run_mean[r][s][0];
    terms.push_back(t / static_cast<double>(w));
  }
  if (terms.size() < 2) return 0;
  double mu = 0;
  for (double t : terms) mu += t;
  mu /= static_cast<double>(terms.size());
  double var = 0;
  for (double t : terms) var += (t - mu) * (t - mu);
  var /= static_cast<double>(terms.size() - 1);
  return std::sqrt(var / static_cast<double>(terms.size()));
}

std::vector<double> ObservableTrace::hist_marginal_v1() const {
  if (dim == 1) return hist_mass;
  std::vector<double> marg(hist_bins, 0.0);
  std::size_t inner = 1;
  for (int a = 1; a < dim; ++a) inner *= static_cast<std::size_t>(hist_bins);
  for (int b = 0; b < hist_bins; ++b)
    for (std::size_t j = 0; j < inner; ++j)
      marg[b] += hist_mass[static_cast<std::size_t>(b) * inner + j];
  return marg;
}

double histogram_vs_analytic(const ObservableTrace &trace, const ModelParams &p,
                             double u_root, const QuadratureConfig &cfg) {
  p.validate();
  cfg.validate();
  require(p.noise > 0, ErrorCode::invalid_argument,
          "histogram_vs_analytic requires D > 0");
  require(u_root >= 0, ErrorCode::invalid_argument, "u_root must be >= 0");
  require(trace.dim == p.dim, ErrorCode::invalid_argument,
          "trace/params dimension mismatch");
  require(p.dim <= 2, ErrorCode::unsupported,
          "histogram_vs_analytic: dim = 3 not supported");

  const double pmin = axis_potential_min(p.alpha, u_root);
  const double D = p.noise;
  const double z_mantissa = partition_function(p, u_root, cfg).mantissa;
  const int nb = trace.hist_bins;
  const double h = (trace.hist_hi - trace.hist_lo) / nb;

  QuadratureConfig bin_cfg{1e-10, 1e-16, 200, cfg.truncation_margin};
  double l1 = 0, covered = 0;
  if (p.dim == 1) {
    for (int b = 0; b < nb; ++b) {
      const double a = trace.hist_lo + b * h;
      auto f = [&](double v) {
        return std::exp(-(axis_potential(p.alpha, u_root, v) - pmin) / D);
      };
      const double mass =
          adaptive_gk_1(f, a, a + h, {}, bin_cfg, "histogram bin") / z_mantissa;
      covered += mass;
      l1 += std::abs(trace.hist_mass[b] - mass);
    }
  } else {
    // Fixed tensor GK15 per cell: cells are far narrower than any feature.
    for (int b0 = 0; b0 < nb; ++b0) {
      const double a0 = trace.hist_lo + b0 * h;
      for (int b1 = 0; b1 < nb; ++b1) {
        const double a1 = trace.hist_lo + b1 * h;
        auto inner = [&](double v1) {
          auto g = [&](double v2) {
            const std::array<double, 2> v{v1, v2};
            return std::exp(-(potential_value(p, u_root, v) - pmin) / D);
          };
          double out = 0;
          auto wrap = [&g](double x, double *o) { o[0] = g(x); };
          const auto r = detail::gk15(wrap, 1, a1, a1 + h);
          out = r.value[0];
          return out;
        };
        auto wrap = [&inner](double x, double *o) { o[0] = inner(x); };
        const auto r = detail::gk15(wrap, 1, a0, a0 + h);
        const double mass = r.value[0] / z_mantissa;
        covered += mass;
        l1 += std::abs(trace.hist_mass[static_cast<std::size_t>(b0) * nb + b1] -
                       mass);
      }
    }
  }
  require(1 - covered < 1e-6, ErrorCode::support_mismatch,
          "analytic mass outside the histogram range exceeds 1e-6");
  return l1;
}

} // namespace spcs
