#include "nelson/sampling.hpp"

#include <cmath>
#include <limits>

namespace nelson {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (tags.size() + 1));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double sample_radius(const RadialCutoff& cutoff, double a, Rng& rng) {
  if (!(a > -1.0)) throw std::invalid_argument("sample_radius: exponent must exceed -1");
  const double sigma = cutoff.scale();
  switch (cutoff.family()) {
    case CutoffFamily::Sharp: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double x;
      do x = u(rng);
      while (x == 0.0);
      return sigma * std::pow(x, 1.0 / (a + 1.0));
    }
    case CutoffFamily::Gaussian: {
      // r^2 / sigma^2 ~ Gamma((a+1)/2).
      std::gamma_distribution<double> g(0.5 * (a + 1.0), 1.0);
      double x;
      do x = g(rng);
      while (x == 0.0);
      return sigma * std::sqrt(x);
    }
    case CutoffFamily::PowerLaw: {
      // r / kappa is beta-prime(a+1, 2 alpha - a - 1).
      const double b = 2.0 * cutoff.exponent() - a - 1.0;
      if (!(b > 0.0)) throw DivergentIntegral("sample_radius: radial density not normalisable");
      std::gamma_distribution<double> g1(a + 1.0, 1.0), g2(b, 1.0);
      double x;
      do x = g1(rng) / g2(rng);
      while (!(x > 0.0) || !std::isfinite(x));
      return sigma * x;
    }
  }
  throw std::logic_error("unknown cutoff family");
}

Eigen::VectorXd sample_direction(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  double norm;
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

MomentTable::MomentTable(const RadialCutoff& cutoff, int dimension, int max_p)
    : max_p_(std::max(max_p, -2)) {
  for (int p = -2; p <= max_p_; ++p) log_m_.push_back(log_moment(cutoff, p, dimension));
}

double MomentTable::log_m(int p) const {
  if (p < -2 || p > max_p_) throw std::out_of_range("MomentTable: exponent outside the table");
  return log_m_[p + 2];
}

ConfigurationSampler::ConfigurationSampler(const Tree& tree, const ModelParams& params,
                                           const MomentTable& moments)
    : tree_(tree),
      params_(params),
      moments_(&moments),
      rooted_(root_tree(tree, 0)),
      degree_(degrees(tree)),
      pnorm_(params.kernel == KernelKind::Brownian ? params.momentum_norm() : 0.0) {
  if (!(pnorm_ < 1.0)) throw std::invalid_argument("sampler: |P| must be below 1");
  const int n = tree.size();
  double bound = 0.0;
  if (params.kernel == KernelKind::Brownian) {
    for (int d : degree_) {
      bound += std::log(2.0) + std::lgamma(d + 1.0) + moments.log_m(-2) -
               (d + 1.0) * std::log1p(-pnorm_);
    }
  } else {
    bound = (n - 1) * std::log(4.0);
    for (int d : degree_) bound += std::log(2.0) + moments.log_m(d - 2);
  }
  log_weight_bound_ = bound;
}

double ConfigurationSampler::mu(double knorm) const { return knorm * (1.0 - pnorm_); }

Configuration ConfigurationSampler::draw(Rng& rng) const {
  const int n = tree_.size();
  const int d = params_.dimension;
  const bool brownian = params_.kernel == KernelKind::Brownian;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  Configuration c;
  c.momenta.resize(d, n);
  for (int j = 0; j < n; ++j) {
    const double a = brownian ? d - 3.0 : d - 3.0 + degree_[j];
    c.momenta.col(j) = sample_radius(params_.cutoff, a, rng) * sample_direction(d, rng);
  }

  c.times.s = Eigen::VectorXd::Zero(n);
  c.times.t = Eigen::VectorXd::Zero(n);
  c.times.convention = TimeConvention::InfiniteVolume;
  auto& s = c.times.s;
  auto& t = c.times.t;
  auto gamma = [&](double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(rng);
  };

  const int root = rooted_.order[0];
  {
    const double k = c.momenta.col(root).norm();
    const double len = brownian ? gamma(degree_[root] + 1.0, mu(k)) : gamma(1.0, k);
    t[root] = coin(rng) ? len : -len;
  }
  for (std::size_t idx = 1; idx < rooted_.order.size(); ++idx) {
    const int v = rooted_.order[idx];
    const int p = rooted_.parent[v];
    const double k = c.momenta.col(v).norm();
    if (brownian) {
      const double lo = std::min(s[p], t[p]);
      const double width = std::abs(s[p] - t[p]);
      const double len = gamma(degree_[v] + 1.0, mu(k));
      const double left = lo + unif(rng) * width - unif(rng) * len;
      if (coin(rng)) {
        s[v] = left;
        t[v] = left + len;
      } else {
        s[v] = left + len;
        t[v] = left;
      }
    } else {
      const double x = coin(rng) ? s[p] : t[p];
      const double jump = gamma(1.0, 1.0);
      const double y = coin(rng) ? x + jump : x - jump;
      const double len = gamma(1.0, k);
      const double other = coin(rng) ? y + len : y - len;
      if (coin(rng)) {
        s[v] = y;
        t[v] = other;
      } else {
        t[v] = y;
        s[v] = other;
      }
    }
  }

  c.h.resize(n - 1);
  for (auto& hv : c.h) hv = unif(rng);
  c.log_density = log_density(c.h, c.times, c.momenta);
  return c;
}

double ConfigurationSampler::log_momentum_density(const MomentumConfig<double>& momenta) const {
  const bool brownian = params_.kernel == KernelKind::Brownian;
  double out = 0.0;
  for (int j = 0; j < tree_.size(); ++j) {
    const double k = momenta.col(j).norm();
    if (k == 0.0) return kNegInf;
    const double p = brownian ? -2.0 : degree_[j] - 2.0;
    out += params_.cutoff.log_squared(k) + p * std::log(k) -
           moments_->log_m(static_cast<int>(p));
  }
  return out;
}

double ConfigurationSampler::log_time_density(const TimeConfig<double>& times,
                                              const MomentumConfig<double>& momenta) const {
  const auto& s = times.s;
  const auto& t = times.t;
  const int root = rooted_.order[0];
  if (s[root] != 0.0) return kNegInf;
  double out = 0.0;
  if (params_.kernel == KernelKind::Brownian) {
    {
      const double m = mu(momenta.col(root).norm());
      const double len = std::abs(t[root]);
      const int dr = degree_[root];
      out += (dr > 0 ? dr * std::log(len) : 0.0) - m * len + (dr + 1.0) * std::log(m) -
             std::log(2.0) - std::lgamma(dr + 1.0);
    }
    for (std::size_t idx = 1; idx < rooted_.order.size(); ++idx) {
      const int v = rooted_.order[idx];
      const int p = rooted_.parent[v];
      const double overlap = std::abs(overlap_a(s[p], t[p], s[v], t[v]));
      if (overlap == 0.0) return kNegInf;
      const double m = mu(momenta.col(v).norm());
      const double len = std::abs(s[v] - t[v]);
      const int dv = degree_[v];
      out += (dv - 1.0) * std::log(len) - m * len + std::log(overlap) + (dv + 1.0) * std::log(m) -
             std::log(2.0) - std::lgamma(dv + 1.0) - std::log(std::abs(s[p] - t[p]));
    }
    return out;
  }
  {
    const double k = momenta.col(root).norm();
    out += std::log(0.5 * k) - k * std::abs(t[root]);
  }
  for (std::size_t idx = 1; idx < rooted_.order.size(); ++idx) {
    const int v = rooted_.order[idx];
    const int p = rooted_.parent[v];
    const double k = momenta.col(v).norm();
    const double b = 0.5 * (std::exp(-std::abs(s[p] - s[v])) + std::exp(-std::abs(s[p] - t[v])) +
                            std::exp(-std::abs(t[p] - s[v])) + std::exp(-std::abs(t[p] - t[v])));
    out += std::log(0.25 * b) + std::log(0.5 * k) - k * std::abs(s[v] - t[v]);
  }
  return out;
}

double ConfigurationSampler::log_density(const std::vector<double>& h,
                                         const TimeConfig<double>& times,
                                         const MomentumConfig<double>& momenta) const {
  for (double v : h) {
    if (!(v >= 0.0 && v <= 1.0)) return kNegInf;
  }
  const double km = log_momentum_density(momenta);
  if (km == kNegInf) return kNegInf;
  return km + log_time_density(times, momenta);
}

Configuration sample_configuration(const Tree& tree, const ModelParams& params, Rng& rng) {
  int max_degree = 0;
  for (int d : degrees(tree)) max_degree = std::max(max_degree, d);
  const MomentTable moments(params.cutoff, params.dimension, max_degree - 2);
  return ConfigurationSampler(tree, params, moments).draw(rng);
}

}  // namespace nelson
