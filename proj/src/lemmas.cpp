#include "nelson/lemmas.hpp"

#include "nelson/kernel.hpp"
#include "nelson/sampling.hpp"

#include <bit>
#include <cmath>

namespace nelson {

namespace {

struct Welford {
  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double std_error() const { return n > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

constexpr std::uint64_t kIntervalTag = 21;
constexpr std::uint64_t kTreeTimeTag = 22;

}  // namespace

double interval_integral_exact(int p, double mu, double alpha, double beta) {
  if (p < 0 || !(mu > 0.0)) throw std::invalid_argument("interval lemma needs p >= 0 and mu > 0");
  return 2.0 * std::tgamma(p + 2.0) * std::abs(beta - alpha) / std::pow(mu, p + 2.0);
}

LemmaEstimate interval_integral_mc(int p, double mu, double alpha, double beta,
                                   std::uint64_t samples, std::uint64_t seed) {
  LemmaEstimate out;
  out.exact = interval_integral_exact(p, mu, alpha, beta);
  Rng rng = substream(seed, {kIntervalTag, static_cast<std::uint64_t>(p),
                             static_cast<std::uint64_t>(std::llround(mu * 1000))});
  std::gamma_distribution<double> length(p + 1.0, 1.0 / mu);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const double lo = std::min(alpha, beta);
  const double width = std::abs(beta - alpha);
  // Weight = integrand / proposal; the L^p e^{-mu L} part cancels.
  const double scale = 2.0 * std::tgamma(p + 1.0) / std::pow(mu, p + 1.0);
  Welford acc;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double len = length(rng);
    const double left = lo - len + unif(rng) * (width + len);
    double s = left, t = left + len;
    if (coin(rng)) std::swap(s, t);
    const double overlap = std::abs(overlap_a(alpha, beta, s, t));
    acc.add(scale * overlap * (width + len));
  }
  out.estimate = acc.mean;
  out.std_error = acc.std_error();
  out.samples = samples;
  return out;
}

double tree_time_integral_exact(const Tree& tree, const Eigen::MatrixXd& momenta, double p_norm) {
  const auto deg = degrees(tree);
  double out = 1.0;
  for (int j = 0; j < tree.size(); ++j) {
    const double mu = momenta.col(j).norm() * (1.0 - p_norm);
    out *= 2.0 * std::tgamma(deg[j] + 1.0) / std::pow(mu, deg[j] + 1.0);
  }
  return out;
}

LemmaEstimate tree_time_integral_mc(const Tree& tree, const Eigen::MatrixXd& momenta, double p_norm,
                                    std::uint64_t samples, std::uint64_t seed) {
  const int n = tree.size();
  LemmaEstimate out;
  out.exact = tree_time_integral_exact(tree, momenta, p_norm);
  const auto deg = degrees(tree);
  const RootedTree rooted = root_tree(tree, 0);
  std::vector<double> mu(n);
  for (int j = 0; j < n; ++j) mu[j] = momenta.col(j).norm() * (1.0 - p_norm);

  std::uint64_t code = 0;
  for (const auto& e : tree.edges()) code = code * 131 + static_cast<std::uint64_t>(e.a * 17 + e.b);
  Rng rng = substream(seed, {kTreeTimeTag, static_cast<std::uint64_t>(n), code,
                            std::bit_cast<std::uint64_t>(p_norm)});
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> s(n), t(n);
  Welford acc;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const int root = rooted.order[0];
    const int dr = deg[root];
    std::gamma_distribution<double> root_len(dr + 1.0, 1.0 / mu[root]);
    const double len0 = root_len(rng);
    s[root] = 0.0;
    t[root] = coin(rng) ? len0 : -len0;
    double log_w = std::log(2.0) + std::lgamma(dr + 1.0) - (dr + 1.0) * std::log(mu[root]) -
                   dr * std::log(len0);
    double overlaps = 1.0;
    for (std::size_t idx = 1; idx < rooted.order.size(); ++idx) {
      const int v = rooted.order[idx];
      const int p = rooted.parent[v];
      const double lo = std::min(s[p], t[p]);
      const double width = std::abs(s[p] - t[p]);
      std::gamma_distribution<double> child_len(deg[v], 1.0 / mu[v]);
      const double len = child_len(rng);
      const double left = lo - len + unif(rng) * (width + len);
      s[v] = left;
      t[v] = left + len;
      if (coin(rng)) std::swap(s[v], t[v]);
      overlaps *= std::abs(overlap_a(s[p], t[p], s[v], t[v]));
      log_w += std::log(2.0) + std::lgamma(deg[v]) + std::log(width + len) -
               deg[v] * std::log(mu[v]) - (deg[v] - 1.0) * std::log(len);
    }
    acc.add(overlaps == 0.0 ? 0.0 : overlaps * std::exp(log_w));
  }
  out.estimate = acc.mean;
  out.std_error = acc.std_error();
  out.samples = samples;
  return out;
}

}  // namespace nelson
