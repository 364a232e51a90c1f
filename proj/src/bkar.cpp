#include "nelson/bkar.hpp"

#include "nelson/kernel.hpp"
#include "nelson/quadrature.hpp"

#include <functional>
#include <map>
#include <numeric>

namespace nelson {

InterpolationWeights::InterpolationWeights(Forest f, std::vector<double> weights)
    : forest(std::move(f)), h(std::move(weights)) {
  if (h.size() != forest.edges().size()) {
    throw std::invalid_argument("InterpolationWeights: one h per forest edge required");
  }
  for (double v : h) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("InterpolationWeights: h outside [0, 1]");
  }
}

Eigen::MatrixXd interpolation_matrix(const InterpolationWeights& weights) {
  return interpolation_matrix<double>(weights.forest, std::span<const double>(weights.h));
}

namespace {

Partition threshold_partition(const Forest& forest, const std::vector<double>& h, double level) {
  const int n = forest.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] >= level) {
      int a = find(forest.edges()[i].a), b = find(forest.edges()[i].b);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<int, std::vector<int>> blocks;
  for (int v = 0; v < n; ++v) blocks[find(v)].push_back(v);
  Partition out;
  for (auto& [root, block] : blocks) out.push_back(std::move(block));
  return out;
}

}  // namespace

std::vector<WeightedPartition> partition_decomposition(const InterpolationWeights& weights) {
  std::vector<double> levels(weights.h.begin(), weights.h.end());
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // Ascending levels: the partition at threshold v_q carries weight
  // v_q - v_{q-1}; the singleton partition takes 1 - max h.
  std::vector<WeightedPartition> out;
  for (std::size_t q = 1; q < levels.size(); ++q) {
    const double w = levels[q] - levels[q - 1];
    if (w > 0.0) out.push_back({w, threshold_partition(weights.forest, weights.h, levels[q])});
  }
  const double top = 1.0 - levels.back();
  if (top > 0.0) {
    Partition singletons;
    for (int v = 0; v < weights.forest.size(); ++v) singletons.push_back({v});
    out.push_back({top, std::move(singletons)});
  }
  return out;
}

Eigen::MatrixXd partition_indicator(const Partition& partition, int n) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (const auto& block : partition) {
    for (int a : block) {
      if (a < 0 || a >= n) throw std::invalid_argument("partition_indicator: vertex out of range");
      for (int b : block) v(a, b) = 1.0;
    }
  }
  return v;
}

namespace {

// Integral over [0,1]^m of f(h) as a sum over the m! orderings
// h_{p1} >= h_{p2} >= ... of nested integrals; u(F, h) is linear on each.
double ordered_cube_integral(int m, const std::function<double(const std::vector<double>&)>& f,
                             double tol) {
  if (m == 0) return f({});
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> h(m);
  double total = 0.0;
  do {
    std::function<double(int, double)> level = [&](int depth, double upper) -> double {
      auto g = [&](double x) {
        h[perm[depth]] = x;
        return depth + 1 == m ? f(h) : level(depth + 1, x);
      };
      return integrate(g, 0.0, upper, tol, 0.1 * tol).value;
    };
    total += level(0, 1.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace

BkarSides bkar_check(const Eigen::MatrixXd& a, const Eigen::MatrixXd& momenta, double quad_tol) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || momenta.cols() != n) {
    throw std::invalid_argument("bkar_check: A must be n x n and momenta d x n");
  }
  if (n < 1 || n > 4) throw std::invalid_argument("bkar_check: n must be in 1..4");
  if (!a.isApprox(a.transpose(), 1e-12)) throw std::invalid_argument("bkar_check: A not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument("bkar_check: A is not positive semidefinite");
  }

  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, n);
  BkarSides out{std::exp(exponent<double>(momenta, a, ones)), 0.0};
  const Eigen::MatrixXd gram = momenta.transpose() * momenta;

  for (const Forest& forest : enumerate_forests(n)) {
    const auto& edges = forest.edges();
    const int m = static_cast<int>(edges.size());
    double prefactor = 1.0;
    for (const auto& e : edges) prefactor *= -gram(e.a, e.b) * a(e.a, e.b);
    if (prefactor == 0.0) continue;
    auto f = [&](const std::vector<double>& h) {
      const Eigen::MatrixXd u = interpolation_matrix<double>(forest, std::span<const double>(h));
      return std::exp(exponent<double>(momenta, a, u));
    };
    out.rhs += prefactor * ordered_cube_integral(m, f, quad_tol);
  }
  return out;
}

}  // namespace nelson
