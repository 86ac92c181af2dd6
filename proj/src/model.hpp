// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "errors.hpp"

namespace spcs {

// Coordinates of every computation: velocity dimension N in {1,2,3},
// self-propulsion intensity alpha > 0, diffusion coefficient D >= 0.
struct ModelParams {
  int dim = 1;
  double alpha = 2.0;
  double noise = 0.1;

  void validate() const;
};

// Quadratic-form data of P_u around its global minimum (u > 0 branch):
// P_u = a0 + lambda1 (v1 - vstar)^2 + lambda_perp |v_perp|^2 + cubic/quartic rest.
struct PotentialDecomposition {
  double u = 0;
  double vstar = 0;
  double a0 = 0;
  double lambda1 = 0;
  double lambda_perp = 0;
};

// P_u(v) = -alpha(|v|^2/2 - |v|^4/4) + |v|^2/2 - u v1
double potential_value(const ModelParams &p, double u, std::span<const double> v);

// Unique positive critical point of P_u for u > 0 (Cardano + one Newton polish;
// cubic residual below 1e-12) together with a0 and the quadratic coefficients.
PotentialDecomposition positive_minimum(const ModelParams &p, double u);

// All real roots of alpha v^3 + (1-alpha) v - u = 0, ascending. Returns count.
int cubic_real_roots(double alpha, double u, std::array<double, 3> &roots);

// Axis profile P_u(r e1) and its minimum over the real line (u >= 0: the
// minimum sits on r >= 0). For u > 0 this is (vstar, a0); for u = 0 it is the
// radially symmetric minimum of the confining part.
double axis_potential(double alpha, double u, double r);
double axis_potential_min(double alpha, double u, double *argmin = nullptr);

struct StationaryDensity {
  ModelParams params;
  double ubar = 0;  // magnitude of the mean velocity, along axis 1
  double log_z = 0; // from quadrature::partition_function
};

// log f_ubar(v) = -P_u(v)/D - log Z. Requires D > 0.
double stationary_log_density(const StationaryDensity &sd, std::span<const double> v);

// Density on a uniform velocity grid, stored as bin masses (sum = 1).
struct GridDensity {
  int dim = 1;
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::array<int, 3> bins{};
  std::vector<double> mass; // row-major over the axes

  std::size_t cell_count() const;
  double cell_volume() const;
  // Center coordinate of cell index i along the given axis.
  double center(std::size_t flat, int axis) const;
};

// F[f] = int (alpha|v|^4/4 + (1-alpha)|v|^2/2) f dv - |u_f|^2/2 + D int f log f,
// midpoint rule on the grid, 0 log 0 = 0. Fails on negative entries or when
// the mass deviates from 1 by more than 1e-6.
double free_energy(const ModelParams &p, const GridDensity &density);

} // namespace spcs
