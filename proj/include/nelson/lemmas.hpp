#pragma once

#include "nelson/trees.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace nelson {

struct LemmaEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  std::uint64_t samples = 0;

  double z_score() const { return std_error > 0.0 ? (estimate - exact) / std_error : 0.0; }
  double relative_error() const { return (estimate - exact) / exact; }
};

/// 2 (p+1)! |beta - alpha| / mu^{p+2}.
double interval_integral_exact(int p, double mu, double alpha, double beta);

/// MC for int ds dt |s-t|^p e^{-mu|s-t|} |I(alpha,beta) ∩ I(s,t)| with a box
/// proposal: L ~ Gamma(p+1, mu), left end uniform on a window of length
/// |beta-alpha| + L covering every overlapping placement, random orientation.
LemmaEstimate interval_integral_mc(int p, double mu, double alpha, double beta,
                                   std::uint64_t samples, std::uint64_t seed);

/// prod_j 2 d_j! / mu_j^{d_j+1} with mu_j = |k_j| (1 - |P|); `momenta` is d x n.
double tree_time_integral_exact(const Tree& tree, const Eigen::MatrixXd& momenta, double p_norm);

/// MC over s_1 = 0 and the remaining 2n-1 times of
///   prod_j e^{-mu_j |s_j - t_j|} prod_edges |I_i ∩ I_j|
/// using box proposals on each child (L ~ Gamma(d_j, mu_j), uniform placement).
LemmaEstimate tree_time_integral_mc(const Tree& tree, const Eigen::MatrixXd& momenta, double p_norm,
                                    std::uint64_t samples, std::uint64_t seed);

}  // namespace nelson
