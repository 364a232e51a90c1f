#pragma once

#include "nelson/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nelson {

enum class CoefficientKind {
  EnergyBrownian,
  EnergyOscillator,
  InverseMass,
  LinearTerm,
  WindowGraph,
  WindowTree,
};
std::string to_string(CoefficientKind kind);

enum class TreeMode { Auto, Exhaustive, Sampled };
std::string to_string(TreeMode mode);

/// Tree-sum orders up to which Auto enumerates every tree.
inline constexpr int kExhaustiveEnergyOrder = 6;
inline constexpr int kExhaustiveMassOrder = 5;

struct McConfig {
  /// Draws per tree when trees are enumerated; total draws when trees are
  /// sampled or for window coefficients.
  std::uint64_t samples = 1 << 14;
  /// Draws per batch; samples / batch_size batches feed the error estimate.
  std::uint64_t batch_size = 1 << 10;
  std::uint64_t seed = 0;
  /// Execution only; results do not depend on it.
  int workers = 1;
  TreeMode tree_mode = TreeMode::Auto;

  std::uint64_t batches() const;
  void validate() const;
};

struct CoefficientEstimate {
  int order = 0;
  CoefficientKind kind = CoefficientKind::EnergyBrownian;
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  TreeMode mode = TreeMode::Exhaustive;
};

struct SeriesResult {
  std::vector<CoefficientEstimate> coefficients;
  double coupling = 0.0;
  double momentum_norm = 0.0;
  /// E for energy series, m_eff for the mass series.
  double value = 0.0;
  double stat_error = 0.0;
  /// Rigorous bound on the omitted orders (+inf beyond the radius).
  double truncation_bound = 0.0;
  double radius = 0.0;
  bool radius_exceeded = false;
  /// Mass series only.
  double inverse_mass = 1.0;
  bool heavier_than_free = false;
  std::vector<std::string> warnings;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// T_n = (1/n!) sum_trees int (tree integrand), so that E = P^2/2 - sum g^n T_n
/// (Brownian) or E = -sum g^n T_n (oscillator). Plain importance sampling with
/// the ConfigurationSampler proposal; the error is the spread of batch means.
CoefficientEstimate energy_coefficient(int n, const ModelParams& params, const McConfig& mc);

/// g T_1 at P = 0 by radial quadrature, returned as the energy contribution
/// -(lambda^2/2) int d^dk rho_hat^2 / (k^2 (1 + |k|/2)). For P != 0 the t
/// integral is done in closed form and the angle by quadrature.
double first_order_closed_form(const ModelParams& params);

/// T_1(P) itself (the coefficient multiplying -g).
double first_order_coefficient(const ModelParams& params);

SeriesResult ground_state_energy(const ModelParams& params, int n_max, const McConfig& mc);

/// Order-n term of the P-linear part: the integrand at P = 0 times
/// -sum_j (k_j . e)(s_j - t_j), e = direction of P (first axis if P = 0),
/// with the energy prefactor 1/n!.
CoefficientEstimate linear_term_check(const ModelParams& params, const McConfig& mc, int n);

/// c_{2n}, the lambda^{2n} coefficient of 1/m_eff:
///   -1/(d 4^n n!) sum_trees int |sum_j k_j (s_j - t_j)|^2 (integrand at P = 0).
CoefficientEstimate mass_coefficient(int n, const ModelParams& params, const McConfig& mc);

/// c_2 = -(1/d) int d^dk rho_hat^2 / (k^2 (1 + |k|/2)^3).
double c2_closed_form(const RadialCutoff& cutoff, int d);

/// m_eff = 1 / (1 + sum_{n <= n_max} c_{2n} lambda^{2n}). Throws NumericFailure
/// if the truncated inverse mass is not positive.
SeriesResult effective_mass(const ModelParams& params, int n_max, const McConfig& mc);

/// Order-g^n coefficient of Z_T on the window [0, T] with the full pair
/// coupling (no tree structure):
///   (1/n!) int_{[0,T]^{2n}} int dk prod_j rho_hat^2/|k_j| e^{-|k_j||s_j-t_j|}
///   exp(-1/2 sum_ij k_i.k_j A_ij).
/// For the Brownian kernel the normalisation is Z_T(P) e^{T P^2 / 2}.
CoefficientEstimate zt_graph_coefficient(int n, double window, const ModelParams& params,
                                         const McConfig& mc);

/// Order-g^n coefficient of log Z_T on [0, T]: the tree integrand summed over
/// trees with finite-window times, divided by n!.
CoefficientEstimate window_tree_coefficient(int n, double window, const ModelParams& params,
                                            const McConfig& mc);

struct ExpLogCheck {
  CoefficientEstimate graph;
  /// L_2 + L_1^2 / 2 from tree coefficients, L_1^2 from two independent runs.
  double tree_value = 0.0;
  double tree_error = 0.0;
  double z_score = 0.0;
};

/// Compares zt_graph_coefficient(2) with the exp(log) resummation of tree terms.
ExpLogCheck exp_log_check(double window, const ModelParams& params, const McConfig& mc);

}  // namespace nelson
