// SPDX-License-Identifier: Apache-2.0
//
// extern-C surface of the shared library: opaque handles over the C++ core,
// exceptions mapped to status codes, thread-local error detail.
#include "spcs/spcs.h"

#include <cstring>
#include <exception>
#include <string>

#include "asymptotics.hpp"
#include "consistency.hpp"
#include "model.hpp"
#include "particle.hpp"
#include "quadrature.hpp"

namespace {

thread_local std::string g_last_error;

spcs_status map_code(spcs::ErrorCode c) {
  switch (c) {
    case spcs::ErrorCode::invalid_argument: return SPCS_ERR_INVALID_ARGUMENT;
    case spcs::ErrorCode::quadrature_nonconvergence: return SPCS_ERR_QUADRATURE;
    case spcs::ErrorCode::ambiguous_bracket: return SPCS_ERR_AMBIGUOUS_BRACKET;
    case spcs::ErrorCode::no_sign_change: return SPCS_ERR_NO_SIGN_CHANGE;
    case spcs::ErrorCode::blowup: return SPCS_ERR_BLOWUP;
    case spcs::ErrorCode::bad_density: return SPCS_ERR_BAD_DENSITY;
    case spcs::ErrorCode::support_mismatch: return SPCS_ERR_SUPPORT_MISMATCH;
    case spcs::ErrorCode::unsupported: return SPCS_ERR_UNSUPPORTED;
    case spcs::ErrorCode::internal: return SPCS_ERR_INTERNAL;
  }
  return SPCS_ERR_INTERNAL;
}

template <class F>
spcs_status guarded(F &&f) {
  try {
    f();
    return SPCS_OK;
  } catch (const spcs::Error &e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return SPCS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SPCS_ERR_INTERNAL;
  }
}

spcs::ModelParams to_params(const spcs_params *p) {
  spcs::require(p != nullptr, spcs::ErrorCode::invalid_argument,
                "params pointer is null");
  return {p->dim, p->alpha, p->noise};
}

spcs::QuadratureConfig to_cfg(const spcs_quad_cfg *cfg) {
  if (!cfg) return {};
  return {cfg->rel_tol, cfg->abs_tol, cfg->max_subdivisions,
          cfg->truncation_margin};
}

template <class T>
void check_out(const T *ptr) {
  spcs::require(ptr != nullptr, spcs::ErrorCode::invalid_argument,
                "output pointer is null");
}

spcs::SimConfig to_sim_config(const spcs_sim_config *c) {
  spcs::require(c != nullptr, spcs::ErrorCode::invalid_argument,
                "sim config pointer is null");
  spcs::SimConfig s;
  s.params = {c->params.dim, c->params.alpha, c->params.noise};
  s.n_particles = c->n_particles;
  s.dt = c->dt;
  s.t_end = c->t_end;
  s.n_runs = c->n_runs;
  s.seed = c->seed;
  s.init.kind = c->init_kind == 1 ? spcs::InitLaw::Kind::point
                                  : spcs::InitLaw::Kind::gaussian;
  s.init.mean = {c->init_mean[0], c->init_mean[1], c->init_mean[2]};
  s.init.sigma = c->init_sigma;
  s.record_every = c->record_every;
  s.hist_bins = c->hist_bins;
  s.hist_lo = c->hist_lo;
  s.hist_hi = c->hist_hi;
  s.threads = c->threads;
  return s;
}

} // namespace

struct spcs_bifurcation {
  spcs::BifurcationCurve curve;
};
struct spcs_phase_diagram {
  spcs::PhaseDiagram pd;
};
struct spcs_trace {
  spcs::ObservableTrace trace;
};

extern "C" {

const char *spcs_status_str(spcs_status s) {
  switch (s) {
    case SPCS_OK: return "ok";
    case SPCS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPCS_ERR_QUADRATURE: return "quadrature did not converge";
    case SPCS_ERR_AMBIGUOUS_BRACKET: return "ambiguous root bracket";
    case SPCS_ERR_NO_SIGN_CHANGE: return "no sign change found";
    case SPCS_ERR_BLOWUP: return "particle blow-up";
    case SPCS_ERR_BAD_DENSITY: return "bad grid density";
    case SPCS_ERR_SUPPORT_MISMATCH: return "histogram support mismatch";
    case SPCS_ERR_UNSUPPORTED: return "unsupported";
    case SPCS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *spcs_last_error(void) { return g_last_error.c_str(); }

const char *spcs_version(void) { return "0.1.0"; }

spcs_quad_cfg spcs_quad_cfg_default(void) {
  spcs::QuadratureConfig d;
  return {d.rel_tol, d.abs_tol, d.max_subdivisions, d.truncation_margin};
}

spcs_status spcs_potential_value(const spcs_params *p, double u, const double *v,
                                 double *out) {
  return guarded([&] {
    check_out(out);
    check_out(v);
    const auto mp = to_params(p);
    *out = spcs::potential_value(mp, u,
                                 std::span<const double>(v, static_cast<std::size_t>(mp.dim)));
  });
}

spcs_status spcs_positive_minimum(const spcs_params *p, double u,
                                  spcs_potential_min *out) {
  return guarded([&] {
    check_out(out);
    const auto d = spcs::positive_minimum(to_params(p), u);
    *out = {d.u, d.vstar, d.a0, d.lambda1, d.lambda_perp};
  });
}

spcs_status spcs_partition_function(const spcs_params *p, double u,
                                    const spcs_quad_cfg *cfg, double *mantissa,
                                    double *log_scale) {
  return guarded([&] {
    check_out(mantissa);
    check_out(log_scale);
    const auto z = spcs::partition_function(to_params(p), u, to_cfg(cfg));
    *mantissa = z.mantissa;
    *log_scale = z.log_scale;
  });
}

spcs_status spcs_stationary_log_density(const spcs_params *p, double u,
                                        double log_z, const double *v,
                                        double *out) {
  return guarded([&] {
    check_out(out);
    check_out(v);
    const auto mp = to_params(p);
    spcs::StationaryDensity sd{mp, u, log_z};
    *out = spcs::stationary_log_density(
        sd, std::span<const double>(v, static_cast<std::size_t>(mp.dim)));
  });
}

spcs_status spcs_free_energy_grid(const spcs_params *p, const double *lo,
                                  const double *hi, const int *nbins,
                                  const double *mass, double *out) {
  return guarded([&] {
    check_out(out);
    check_out(lo);
    check_out(hi);
    check_out(nbins);
    check_out(mass);
    const auto mp = to_params(p);
    spcs::GridDensity g;
    g.dim = mp.dim;
    std::size_t cells = 1;
    for (int a = 0; a < mp.dim; ++a) {
      g.lo[a] = lo[a];
      g.hi[a] = hi[a];
      g.bins[a] = nbins[a];
      spcs::require(nbins[a] > 0, spcs::ErrorCode::invalid_argument,
                    "nbins must be positive");
      cells *= static_cast<std::size_t>(nbins[a]);
    }
    g.mass.assign(mass, mass + cells);
    *out = spcs::free_energy(mp, g);
  });
}

spcs_status spcs_angular_integral(int n, int dim, double z, double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::angular_integral(n, dim, z);
  });
}

spcs_status spcs_radial_weight(const spcs_params *p, double r, double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::radial_weight(to_params(p), r);
  });
}

spcs_status spcs_centered_moment(const spcs_params *p, double u, int k,
                                 const spcs_quad_cfg *cfg, double *mantissa,
                                 double *log_scale) {
  return guarded([&] {
    check_out(mantissa);
    check_out(log_scale);
    const auto v = spcs::centered_moment(to_params(p), u, k, to_cfg(cfg));
    *mantissa = v.mantissa;
    *log_scale = v.log_scale;
  });
}

spcs_status spcs_gaussian_moment(const double *lambdas, const int *beta, int n,
                                 double noise, double *out) {
  return guarded([&] {
    check_out(out);
    check_out(lambdas);
    check_out(beta);
    spcs::require(n >= 1, spcs::ErrorCode::invalid_argument, "n must be >= 1");
    *out = spcs::gaussian_moment(
        std::span<const double>(lambdas, static_cast<std::size_t>(n)),
        std::span<const int>(beta, static_cast<std::size_t>(n)), noise);
  });
}

spcs_status spcs_eval_h(const spcs_params *p, double u, const spcs_quad_cfg *cfg,
                        double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::evaluate_H(to_params(p), u, to_cfg(cfg));
  });
}

spcs_status spcs_eval_dh_du(const spcs_params *p, double u,
                            const spcs_quad_cfg *cfg, double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::evaluate_dH_du(to_params(p), u, to_cfg(cfg));
  });
}

spcs_status spcs_eval_dh_dd(const spcs_params *p, double u,
                            const spcs_quad_cfg *cfg, double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::evaluate_dH_dD(to_params(p), u, to_cfg(cfg));
  });
}

spcs_status spcs_zh_identity(const spcs_params *p, double u,
                             const spcs_quad_cfg *cfg, double *direct,
                             double *parts) {
  return guarded([&] {
    check_out(direct);
    check_out(parts);
    const auto [d, q] = spcs::zh_identity(to_params(p), u, to_cfg(cfg));
    *direct = d;
    *parts = q;
  });
}

spcs_status spcs_find_positive_root(const spcs_params *p, const spcs_quad_cfg *cfg,
                                    double root_tol, int *found, double *u_root) {
  return guarded([&] {
    check_out(found);
    check_out(u_root);
    const auto r = spcs::find_positive_root(to_params(p), to_cfg(cfg), root_tol);
    *found = r.has_value() ? 1 : 0;
    *u_root = r.value_or(0.0);
  });
}

spcs_status spcs_trace_bifurcation(double alpha, int dim, double d_min,
                                   double d_max, double d_step,
                                   const spcs_quad_cfg *cfg,
                                   spcs_bifurcation **out) {
  return guarded([&] {
    check_out(out);
    auto *b = new spcs_bifurcation{
        spcs::trace_bifurcation(alpha, dim, d_min, d_max, d_step, to_cfg(cfg))};
    *out = b;
  });
}

int spcs_bifurcation_size(const spcs_bifurcation *b) {
  return b ? static_cast<int>(b->curve.samples.size()) : 0;
}

spcs_status spcs_bifurcation_sample(const spcs_bifurcation *b, int i,
                                    double *noise, double *u, double *dh_du) {
  return guarded([&] {
    spcs::require(b && i >= 0 && i < static_cast<int>(b->curve.samples.size()),
                  spcs::ErrorCode::invalid_argument, "bad sample index");
    const auto &s = b->curve.samples[static_cast<std::size_t>(i)];
    if (noise) *noise = s.noise;
    if (u) *u = s.u;
    if (dh_du) *dh_du = s.dh_du;
  });
}

double spcs_bifurcation_dc(const spcs_bifurcation *b) {
  return b ? b->curve.d_critical : 0.0;
}

double spcs_bifurcation_slope_at_zero(const spcs_bifurcation *b) {
  return b ? b->curve.slope_at_zero : 0.0;
}

void spcs_bifurcation_free(spcs_bifurcation *b) { delete b; }

spcs_status spcs_critical_noise(double alpha, int dim, const spcs_quad_cfg *cfg,
                                double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::critical_noise(alpha, dim, to_cfg(cfg));
  });
}

spcs_status spcs_phase_scan(const double *alphas, int n_alpha,
                            const double *noises, int n_noise, int dim,
                            const spcs_quad_cfg *cfg, int threads,
                            spcs_phase_diagram **out) {
  return guarded([&] {
    check_out(out);
    check_out(alphas);
    check_out(noises);
    spcs::require(n_alpha >= 1 && n_noise >= 1, spcs::ErrorCode::invalid_argument,
                  "empty grid");
    auto *pd = new spcs_phase_diagram{spcs::phase_scan(
        std::span<const double>(alphas, static_cast<std::size_t>(n_alpha)),
        std::span<const double>(noises, static_cast<std::size_t>(n_noise)), dim,
        to_cfg(cfg), threads)};
    *out = pd;
  });
}

int spcs_phase_grid_size(const spcs_phase_diagram *pd) {
  return pd ? static_cast<int>(pd->pd.grid.size()) : 0;
}

spcs_status spcs_phase_grid_point(const spcs_phase_diagram *pd, int i,
                                  double *alpha, double *noise, int *n_states,
                                  int *status) {
  return guarded([&] {
    spcs::require(pd && i >= 0 && i < static_cast<int>(pd->pd.grid.size()),
                  spcs::ErrorCode::invalid_argument, "bad grid index");
    const auto &pt = pd->pd.grid[static_cast<std::size_t>(i)];
    if (alpha) *alpha = pt.alpha;
    if (noise) *noise = pt.noise;
    if (n_states) *n_states = pt.n_states;
    if (status) *status = pt.ok ? SPCS_OK : map_code(pt.status);
  });
}

int spcs_phase_boundary_size(const spcs_phase_diagram *pd) {
  return pd ? static_cast<int>(pd->pd.boundary.size()) : 0;
}

spcs_status spcs_phase_boundary_point(const spcs_phase_diagram *pd, int i,
                                      double *alpha, double *dc) {
  return guarded([&] {
    spcs::require(pd && i >= 0 && i < static_cast<int>(pd->pd.boundary.size()),
                  spcs::ErrorCode::invalid_argument, "bad boundary index");
    if (alpha) *alpha = pd->pd.boundary[static_cast<std::size_t>(i)].first;
    if (dc) *dc = pd->pd.boundary[static_cast<std::size_t>(i)].second;
  });
}

void spcs_phase_diagram_free(spcs_phase_diagram *pd) { delete pd; }

spcs_status spcs_laplace_coefficients(double alpha, int dim,
                                      spcs_laplace_coeffs *out) {
  return guarded([&] {
    check_out(out);
    const auto c = spcs::coefficients(alpha, dim);
    *out = {c.alpha, c.dim, c.c0, c.c1, c.c2, c.k1, c.k2,
            c.dh_du_limit, c.dh_dd_limit, c.bif_slope};
  });
}

spcs_status spcs_moment_table(double alpha, int dim, double *closed,
                              double *assembled, int *count) {
  return guarded([&] {
    check_out(closed);
    check_out(assembled);
    check_out(count);
    const auto table = spcs::moment_table(alpha, dim);
    spcs::require(table.size() <= 7, spcs::ErrorCode::internal, "table too long");
    for (std::size_t i = 0; i < table.size(); ++i) {
      closed[i] = table[i].closed_form;
      assembled[i] = table[i].via_gaussian_moment;
    }
    *count = static_cast<int>(table.size());
  });
}

const char *spcs_moment_name(double alpha, int dim, int i) {
  try {
    const auto table = spcs::moment_table(alpha, dim);
    if (i < 0 || i >= static_cast<int>(table.size())) return "";
    static thread_local std::string name;
    name = table[static_cast<std::size_t>(i)].name;
    return name.c_str();
  } catch (...) {
    return "";
  }
}

spcs_status spcs_expansion_check(double alpha, int dim, double u, int n_points,
                                 const spcs_quad_cfg *cfg,
                                 spcs_expansion_report *out) {
  return guarded([&] {
    check_out(out);
    spcs::require(n_points >= 3 && n_points <= SPCS_EXPANSION_MAX_POINTS,
                  spcs::ErrorCode::invalid_argument, "bad n_points");
    const auto rep = spcs::expansion_check(alpha, dim, u, n_points, to_cfg(cfg));
    std::memset(out, 0, sizeof(*out));
    out->n_points = static_cast<int>(rep.noise.size());
    out->coeff_closed = rep.coeff_closed_form ? 1 : 0;
    for (int j = 0; j < out->n_points; ++j) out->noise[j] = rep.noise[j];
    for (int k = 0; k < 3; ++k) {
      out->coeff[k] = rep.coeff[k];
      out->slope[k] = rep.slope[k];
      for (int j = 0; j < out->n_points; ++j) {
        out->g[k][j] = rep.g[k][j];
        out->residual[k][j] = rep.residual[k][j];
      }
    }
  });
}

spcs_status spcs_extended_h_zero_noise(double alpha, double u, double *out) {
  return guarded([&] {
    check_out(out);
    *out = spcs::extended_H_at_zero_noise(alpha, u);
  });
}

spcs_sim_config spcs_sim_config_default(void) {
  spcs_sim_config c;
  std::memset(&c, 0, sizeof(c));
  c.params = {1, 2.0, 0.1};
  c.n_particles = 2000;
  c.dt = 0.01;
  c.t_end = 200.0;
  c.n_runs = 1;
  c.seed = 1;
  c.record_every = 50;
  c.init_kind = 0;
  c.init_mean[0] = 0.5;
  c.init_sigma = 1.0;
  c.hist_bins = 200;
  c.hist_lo = -2.5;
  c.hist_hi = 2.5;
  c.threads = 0;
  return c;
}

spcs_status spcs_run_ensemble(const spcs_sim_config *cfg, spcs_trace **out) {
  return guarded([&] {
    check_out(out);
    auto *t = new spcs_trace{spcs::run_ensemble(to_sim_config(cfg))};
    *out = t;
  });
}

int spcs_trace_snapshots(const spcs_trace *t) {
  return t ? static_cast<int>(t->trace.times.size()) : 0;
}

spcs_status spcs_trace_time(const spcs_trace *t, int i, double *out) {
  return guarded([&] {
    check_out(out);
    spcs::require(t && i >= 0 && i < static_cast<int>(t->trace.times.size()),
                  spcs::ErrorCode::invalid_argument, "bad snapshot index");
    *out = t->trace.times[static_cast<std::size_t>(i)];
  });
}

spcs_status spcs_trace_mean_velocity(const spcs_trace *t, int i, double *out) {
  return guarded([&] {
    check_out(out);
    spcs::require(t && i >= 0 && i < static_cast<int>(t->trace.times.size()),
                  spcs::ErrorCode::invalid_argument, "bad snapshot index");
    for (int c = 0; c < t->trace.dim; ++c)
      out[c] = t->trace.mean_velocity[static_cast<std::size_t>(i)][c];
  });
}

int spcs_trace_has_free_energy(const spcs_trace *t) {
  return t && !t->trace.free_energy.empty() ? 1 : 0;
}

spcs_status spcs_trace_free_energy(const spcs_trace *t, int i, double *out) {
  return guarded([&] {
    check_out(out);
    spcs::require(t && i >= 0 &&
                      i < static_cast<int>(t->trace.free_energy.size()),
                  spcs::ErrorCode::invalid_argument, "bad snapshot index");
    *out = t->trace.free_energy[static_cast<std::size_t>(i)];
  });
}

int spcs_trace_hist_bins(const spcs_trace *t) {
  return t ? t->trace.hist_bins : 0;
}

spcs_status spcs_trace_histogram(const spcs_trace *t, double *bin_lo,
                                 double *bin_hi, double *mass) {
  return guarded([&] {
    spcs::require(t != nullptr, spcs::ErrorCode::invalid_argument,
                  "trace pointer is null");
    const auto marg = t->trace.hist_marginal_v1();
    const double h =
        (t->trace.hist_hi - t->trace.hist_lo) / t->trace.hist_bins;
    for (int b = 0; b < t->trace.hist_bins; ++b) {
      if (bin_lo) bin_lo[b] = t->trace.hist_lo + b * h;
      if (bin_hi) bin_hi[b] = t->trace.hist_lo + (b + 1) * h;
      if (mass) mass[b] = marg[static_cast<std::size_t>(b)];
    }
  });
}

int spcs_trace_runs_completed(const spcs_trace *t) {
  return t ? t->trace.runs_completed : 0;
}

int spcs_trace_runs_total(const spcs_trace *t) { return t ? t->trace.n_runs : 0; }

spcs_status spcs_trace_terminal(const spcs_trace *t, double *mean, double *se1) {
  return guarded([&] {
    spcs::require(t != nullptr, spcs::ErrorCode::invalid_argument,
                  "trace pointer is null");
    const auto m = t->trace.terminal_mean();
    if (mean)
      for (int c = 0; c < t->trace.dim; ++c) mean[c] = m[c];
    if (se1) *se1 = t->trace.terminal_se1();
  });
}

void spcs_trace_free(spcs_trace *t) { delete t; }

spcs_status spcs_histogram_vs_analytic(const spcs_trace *t, const spcs_params *p,
                                       double u_root, const spcs_quad_cfg *cfg,
                                       double *out) {
  return guarded([&] {
    check_out(out);
    spcs::require(t != nullptr, spcs::ErrorCode::invalid_argument,
                  "trace pointer is null");
    *out = spcs::histogram_vs_analytic(t->trace, to_params(p), u_root, to_cfg(cfg));
  });
}

} // extern "C"
