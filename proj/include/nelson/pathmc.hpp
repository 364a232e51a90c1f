#pragma once

#include "nelson/model.hpp"
#include "nelson/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace nelson {

struct PathConfig {
  double horizon = 4.0;
  int steps = 64;
  std::uint64_t samples = 4096;
  std::uint64_t batch_size = 256;
  std::uint64_t seed = 0;
  /// Execution only.
  int workers = 1;

  /// Throws std::invalid_argument unless steps >= 8, two or more batches,
  /// and the grid step resolves the cutoff: T/m <= 1/(4 k_max).
  void validate(const RadialCutoff& cutoff) const;
};

/// Paths sampled on the grid t_a = a T/m, a = 0..m; each path is d x (m+1).
struct PathEnsemble {
  KernelKind kind = KernelKind::Oscillator;
  double horizon = 0.0;
  int steps = 0;
  std::vector<Eigen::MatrixXd> paths;
};

/// W(q, t) = 1/4 int d^3k rho_hat^2 / |k| e^{i k.q} e^{-|k||t|}
///         = (pi/q) int_0^inf rho_hat(r)^2 e^{-r|t|} sin(rq) dr (q > 0).
/// Only d = 3 is supported.
double w_potential(double q, double t, const RadialCutoff& cutoff, int d = 3);

/// OU paths start from the stationary law N(0, 1/2) and use the exact
/// one-step update; Brownian paths start at 0 with exact increments.
PathEnsemble sample_paths(KernelKind kind, const PathConfig& cfg, Rng& rng, int d = 3);

struct ZEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double log_value = 0.0;
  double log_std_error = 0.0;
  /// Mean of the sine part for the Brownian kernel; should vanish.
  double imaginary = 0.0;
  double imaginary_std_error = 0.0;
  /// log Z on the same paths with every other grid point dropped, minus
  /// log Z: a grid-refinement diagnostic.
  double discretization = 0.0;
  /// Bound on |log Z| change from tabulating W (lambda^2 T^2 max table error).
  double interpolation_error = 0.0;
  /// lambda^2 sum_ab w_a w_b E[W(q_a - q_b, t_a - t_b)] on the same grid.
  double first_cumulant = 0.0;
  std::uint64_t samples = 0;
};

/// Z_T = E[cos(P.b_T) exp(lambda^2 int int W)] (P = 0 for the oscillator),
/// double integral by the trapezoid rule on the grid. Throws NumericFailure
/// when lambda^2 T^2 W(0,0) exceeds the exponent cap.
ZEstimate z_estimate(const ModelParams& params, const PathConfig& cfg);

/// E[W(q_t - q_0, t)] in closed radial form.
double mean_potential(const ModelParams& params, double tau);

struct HorizonEstimate {
  double horizon = 0.0;
  double log_z = 0.0;
  double log_z_std_error = 0.0;
  /// -(1/T) log Z_T.
  double energy = 0.0;
  double energy_std_error = 0.0;
  /// energy with the finite-T, finite-grid first cumulant replaced by its
  /// T -> infinity limit; the input to the extrapolation.
  double corrected_energy = 0.0;
  double discretization = 0.0;
  double interpolation_error = 0.0;
};

struct PathEnergy {
  std::vector<HorizonEstimate> horizons;
  /// Intercept of the weighted fit corrected_energy = E + b / T.
  double extrapolated = 0.0;
  double extrapolated_std_error = 0.0;
  double slope = 0.0;
  /// Normalised fit residuals per horizon.
  std::vector<double> residuals;
  /// Largest discretisation/interpolation effect on the energy, over T.
  double systematic = 0.0;
  std::vector<std::string> warnings;
};

/// Runs z_estimate for each config (increasing horizons) and extrapolates.
/// The massless field gives the first cumulant a log(T)/T approach, so the
/// exact first cumulant is swapped for its limit before fitting.
PathEnergy energy_from_paths(const ModelParams& params, const std::vector<PathConfig>& configs);

}  // namespace nelson
