#pragma once

#include "nelson/trees.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace nelson {

/// Interpolation parameters h_l in [0, 1], one per forest edge, aligned with
/// forest.edges().
struct InterpolationWeights {
  Forest forest;
  std::vector<double> h;

  InterpolationWeights(Forest f, std::vector<double> weights);
};

/// u(F, h)_{ab} = min of h over the forest path joining a and b, or 0 when a
/// and b lie in different components. The diagonal is set to 1.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> interpolation_matrix(
    const Forest& forest, std::span<const Scalar> h) {
  const int n = forest.size();
  if (h.size() != forest.edges().size()) {
    throw std::invalid_argument("interpolation_matrix: one h per forest edge required");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> u =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  const auto nb = forest.adjacency();
  std::vector<int> stack;
  std::vector<Scalar> running(n);
  std::vector<int> visited(n, -1);
  for (int root = 0; root < n; ++root) {
    u(root, root) = Scalar(1);
    stack.assign(1, root);
    running[root] = Scalar(1);
    visited[root] = root;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, idx] : nb[v]) {
        if (visited[w] == root) continue;
        visited[w] = root;
        running[w] = std::min(running[v], h[idx]);
        u(root, w) = running[w];
        stack.push_back(w);
      }
    }
  }
  return u;
}

Eigen::MatrixXd interpolation_matrix(const InterpolationWeights& weights);

/// A set partition of {0, ..., n-1}; blocks sorted, ordered by first element.
using Partition = std::vector<std::vector<int>>;

struct WeightedPartition {
  double weight;
  Partition blocks;
};

/// Convex decomposition u(F, h) = sum_q weight_q v_{pi_q}, where v_pi is the
/// same-block indicator of pi. Built by thresholding h at each distinct value
/// in descending order; listed from the coarsest partition to the finest and
/// with zero-weight terms dropped.
std::vector<WeightedPartition> partition_decomposition(const InterpolationWeights& weights);

/// Same-block indicator matrix of a partition (unit diagonal).
Eigen::MatrixXd partition_indicator(const Partition& partition, int n);

struct BkarSides {
  double lhs;
  double rhs;
};

/// Numerical check of the forest interpolation identity for
///   F(u) = exp(-1/2 sum_i |k_i|^2 A_ii - 1/2 sum_{i != j} k_i.k_j A_ij u_ij).
/// lhs = F(1); rhs = sum over forests of the h-integral of the mixed partial
/// derivative at u(F, h), each h-integral by nested adaptive quadrature on the
/// h-orderings (where the integrand is smooth) to quad_tol.
/// `momenta` is d x n. Requires n <= 4 and A positive semidefinite.
BkarSides bkar_check(const Eigen::MatrixXd& a_matrix, const Eigen::MatrixXd& momenta,
                     double quad_tol = 1e-10);

}  // namespace nelson
