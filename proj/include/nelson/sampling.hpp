#pragma once

#include "nelson/kernel.hpp"
#include "nelson/model.hpp"
#include "nelson/trees.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace nelson {

using Rng = std::mt19937_64;

/// Independent generator for a work unit; the stream depends only on the seed
/// and the tags, never on which worker runs it.
Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// r > 0 with density proportional to r^a rho_hat(r)^2; requires a > -1 and,
/// for the powerlaw family, 2 alpha - a - 1 > 0. Exact, no rejection.
double sample_radius(const RadialCutoff& cutoff, double a, Rng& rng);

/// Uniform point on the unit sphere in R^d.
Eigen::VectorXd sample_direction(int d, Rng& rng);

/// log M(p) for integer p in [-2, max_p], computed once and shared.
class MomentTable {
 public:
  MomentTable(const RadialCutoff& cutoff, int dimension, int max_p);
  double log_m(int p) const;

 private:
  int max_p_;
  std::vector<double> log_m_;
};

struct Configuration {
  std::vector<double> h;
  TimeConfig<double> times;
  MomentumConfig<double> momenta;
  /// log of the joint proposal density at this point.
  double log_density = 0.0;
};

/// Importance proposal for one tree, with closed-form normalisation.
///
/// Brownian: the density is the crude-bound integrand
///   prod_j rho_hat^2 |k_j|^{d_j-1} e^{-mu_j L_j} prod_edges |I_i ∩ I_j|,
/// mu_j = |k_j|(1-|P|), divided by its integral
///   prod_j 2 d_j! M(-2) (1-|P|)^{-(d_j+1)},
/// so |weight| is at most exp(log_weight_bound()). Times are drawn root to
/// leaves: root t = ±Gamma(d_1+1, mu_1); a child of an interval of length W
/// gets L ~ Gamma(d_j+1, mu_j), left end lo + U1 W - U2 L, random orientation.
/// Momenta are independent with density rho_hat^2 / |k|^2 / M(-2).
///
/// Oscillator: a mixture over refined trees. Each child picks one endpoint of
/// its parent and one of its own (four equally likely choices), places its
/// endpoint at Laplace(1) distance and its other endpoint at Exp(|k_j|)
/// distance. Momenta have density rho_hat^2 |k|^{d_j-2} / M(d_j-2). The
/// density is then
///   4^{-(n-1)} prod_j rho_hat^2 |k_j|^{d_j-1} e^{-|k_j| L_j} / (2 M(d_j-2))
///   * prod_edges 1/2 sum_{x,y} e^{-|x-y|},
/// and |weight| <= 4^{n-1} prod_j 2 M(d_j-2).
///
/// h is uniform on [0,1]^{n-1} in both cases.
class ConfigurationSampler {
 public:
  ConfigurationSampler(const Tree& tree, const ModelParams& params, const MomentTable& moments);

  Configuration draw(Rng& rng) const;
  double log_density(const std::vector<double>& h, const TimeConfig<double>& times,
                     const MomentumConfig<double>& momenta) const;
  double log_weight_bound() const { return log_weight_bound_; }
  const Tree& tree() const { return tree_; }
  const std::vector<int>& vertex_degrees() const { return degree_; }

 private:
  double log_time_density(const TimeConfig<double>& times,
                          const MomentumConfig<double>& momenta) const;
  double log_momentum_density(const MomentumConfig<double>& momenta) const;
  double mu(double knorm) const;

  Tree tree_;
  ModelParams params_;
  const MomentTable* moments_;
  RootedTree rooted_;
  std::vector<int> degree_;
  double pnorm_;
  double log_weight_bound_;
};

/// One draw from the proposal for `tree`.
Configuration sample_configuration(const Tree& tree, const ModelParams& params, Rng& rng);

}  // namespace nelson
