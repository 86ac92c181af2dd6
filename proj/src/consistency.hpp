// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace spcs {

// One evaluated point of the self-consistency map H(u, D) = int (v1 - u) f dv.
struct ConsistencyPoint {
  double u = 0;
  double noise = 0;
  double h = 0;
  double dh_du = 0;
  double dh_dd = 0;
  bool has_dh_dd = false; // dH/dD is only defined on the u > 0 branch
};

// H(u,D) = F1/F0 + (v1*(u) - u) for u > 0; exactly 0 at u = 0 (symmetry).
double evaluate_H(const ModelParams &p, double u, const QuadratureConfig &cfg);

// dH/du = (F0 F2 - F1^2) / (D F0^2) - 1.
double evaluate_dH_du(const ModelParams &p, double u, const QuadratureConfig &cfg);

// dH/dD = (F0 MA - F1 MB) / (D^2 F0^2) with MA, MB the (P_u - a0)-weighted
// moments; u > 0 only.
double evaluate_dH_dD(const ModelParams &p, double u, const QuadratureConfig &cfg);

// H, dH/du (and dH/dD when u > 0 and requested) from one batched quadrature.
ConsistencyPoint evaluate_point(const ModelParams &p, double u,
                                const QuadratureConfig &cfg, bool want_dh_dd);

// Z*H evaluated directly and through the integration-by-parts form
// -alpha int v1 (|v|^2 - 1) exp(...) dv; both returned as mantissas with the
// same exponential shift, from a single batched pass.
std::pair<double, double> zh_identity(const ModelParams &p, double u,
                                      const QuadratureConfig &cfg);

// Positive root of H on (1e-4, 3) at fixed D: 64-point bracketing scan, then
// safeguarded Newton using dH/du. nullopt when H < 0 throughout (disordered
// regime). Throws ambiguous_bracket when several sign changes are detected.
std::optional<double> find_positive_root(const ModelParams &p,
                                         const QuadratureConfig &cfg,
                                         double root_tol = 1e-9);

struct BifurcationSample {
  double noise = 0;
  double u = 0;
  double dh_du = 0;
};

struct BifurcationCurve {
  double alpha = 0;
  int dim = 1;
  std::vector<BifurcationSample> samples;
  double d_critical = 0;    // NaN when the curve never merges inside the range
  double slope_at_zero = 0; // least-squares du/dD over the first samples
};

// Continuation in D from d_min upward, warm-starting each root from the
// previous one; the step halves whenever the root moves by more than 0.1.
// D_c refinement follows the dH/du(0, D) sign change.
BifurcationCurve trace_bifurcation(double alpha, int dim, double d_min,
                                   double d_max, double d_step,
                                   const QuadratureConfig &cfg,
                                   double root_tol = 1e-10);

// Critical noise: bisection on D -> dH/du(0, D) to 1e-8, interval doubled as
// needed. Throws no_sign_change when the cap is reached.
double critical_noise(double alpha, int dim, const QuadratureConfig &cfg);

struct PhasePoint {
  double alpha = 0;
  double noise = 0;
  int n_states = 0; // 1 or 2 ("more than one"); 0 when the point errored
  ErrorCode status = ErrorCode::internal;
  bool ok = false;
};

struct PhaseDiagram {
  std::vector<PhasePoint> grid; // row-major: alpha outer, D inner
  std::vector<std::pair<double, double>> boundary; // (alpha, D_c)
};

// Grid classification by root presence (rows fan out across threads);
// boundary by warm-started critical-noise continuation along alpha.
PhaseDiagram phase_scan(std::span<const double> alphas,
                        std::span<const double> noises, int dim,
                        const QuadratureConfig &cfg, int threads = 0);

} // namespace spcs
