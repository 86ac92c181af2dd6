// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace spcs {

struct InitLaw {
  enum class Kind { gaussian, point };
  Kind kind = Kind::gaussian;
  std::array<double, 3> mean{0.5, 0.0, 0.0};
  double sigma = 1.0;
};

struct SimConfig {
  ModelParams params;
  int n_particles = 2000;
  double dt = 0.01;
  double t_end = 200.0;
  int n_runs = 1;
  uint64_t seed = 1;
  InitLaw init;
  int record_every = 50; // steps between observable snapshots
  int hist_bins = 200;   // per axis on [hist_lo, hist_hi]
  double hist_lo = -2.5;
  double hist_hi = 2.5;
  int threads = 0; // 0 = auto; results do not depend on the thread count

  void validate() const;
};

struct ObservableTrace {
  int dim = 1;
  int n_runs = 0;
  int runs_completed = 0;
  std::vector<uint8_t> run_ok; // aborted runs are marked, not renormalized away

  std::vector<double> times;
  std::vector<std::array<double, 3>> mean_velocity; // ensemble average
  std::vector<double> free_energy;                  // dim = 1 ensembles only

  // Final-time pooled histogram (row-major over axes; dim = 1: plain bins).
  int hist_bins = 0;
  double hist_lo = 0, hist_hi = 0;
  std::vector<double> hist_mass;

  // Per-run mean-velocity traces, merged in run order.
  std::vector<std::vector<std::array<double, 3>>> per_run_mean;

  // Terminal statistics: averages over the final 10% of snapshots.
  std::array<double, 3> terminal_mean() const;
  double terminal_se1() const; // ensemble standard error, first component

  // Marginal over v1 of the final histogram (equals hist_mass for dim = 1).
  std::vector<double> hist_marginal_v1() const;
};

// One Euler-Maruyama step: v <- v - [alpha(|v|^2-1)v + (v - ubar)] dt
// + sqrt(2D) dW, with ubar the empirical mean of the pre-step state and dW
// the supplied increments (i.i.d. centered Gaussian, covariance dt * Id).
// Returns the maximum |v|^2 after the step (blow-up guard input).
double em_step(const ModelParams &p, double dt, std::span<double> velocities,
               std::span<const double> noise_increments);

// Ensemble of n_runs independent trajectories with decorrelated counter-based
// streams; deterministic for a fixed SimConfig under any thread count.
ObservableTrace run_ensemble(const SimConfig &cfg);

// L1 distance between the trace's final pooled histogram and the analytic
// stationary density f_{u_root}; bin integrals by quadrature. dim <= 2.
double histogram_vs_analytic(const ObservableTrace &trace, const ModelParams &p,
                             double u_root, const QuadratureConfig &cfg);

} // namespace spcs
