#include "nelson/expansion.hpp"

#include "nelson/bounds.hpp"
#include "nelson/kernel.hpp"
#include "nelson/parallel.hpp"
#include "nelson/quadrature.hpp"
#include "nelson/sampling.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace nelson {

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::EnergyBrownian: return "energy-brownian";
    case CoefficientKind::EnergyOscillator: return "energy-oscillator";
    case CoefficientKind::InverseMass: return "inverse-mass";
    case CoefficientKind::LinearTerm: return "linear-term";
    case CoefficientKind::WindowGraph: return "window-graph";
    case CoefficientKind::WindowTree: return "window-tree";
  }
  return "unknown";
}

std::string to_string(TreeMode mode) {
  switch (mode) {
    case TreeMode::Auto: return "auto";
    case TreeMode::Exhaustive: return "exhaustive";
    case TreeMode::Sampled: return "sampled";
  }
  return "unknown";
}

std::uint64_t McConfig::batches() const { return batch_size == 0 ? 0 : samples / batch_size; }

void McConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (batches() < 2) throw std::invalid_argument("need at least two batches (samples >= 2 batch_size)");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

// Stream tags keep the different estimators statistically independent.
enum StreamTag : std::uint64_t {
  kEnergyTag = 1,
  kMassTag = 2,
  kLinearTag = 3,
  kGraphTag = 4,
  kWindowTreeTag = 5,
};
constexpr std::uint64_t kSampledTreeTag = 0xffffffffull;

using Insertion = std::function<double(const Configuration&)>;

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double signed_weight(const SignedLog<double>& integrand, double log_density) {
  if (integrand.sign == 0) return 0.0;
  return integrand.sign * std::exp(integrand.log_abs - log_density);
}

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
};

BatchStats batch_stats(const std::vector<double>& totals) {
  const double b = static_cast<double>(totals.size());
  double mean = 0.0;
  for (double v : totals) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : totals) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (b - 1.0) / b)};
}

TreeMode resolve_mode(TreeMode requested, int n, int cap) {
  if (requested == TreeMode::Auto) return n <= cap ? TreeMode::Exhaustive : TreeMode::Sampled;
  if (requested == TreeMode::Exhaustive && n > kMaxEnumeratedTreeSize) {
    throw CapExceeded("exhaustive tree summation is capped at n = 9");
  }
  return requested;
}

// prefactor * sum_trees E_q[weight * insertion].
CoefficientEstimate tree_sum_estimate(int n, const ModelParams& params, const McConfig& mc,
                                      CoefficientKind kind, std::uint64_t tag, int cap,
                                      double prefactor, const Insertion& insertion) {
  if (n < 1) throw std::invalid_argument("coefficient order must be >= 1");
  mc.validate();
  params.validate();
  const TreeMode mode = resolve_mode(mc.tree_mode, n, cap);
  const std::uint64_t batches = mc.batches();
  const MomentTable moments(params.cutoff, params.dimension, n - 3);

  auto accumulate = [&](const ConfigurationSampler& sampler, Rng& rng) {
    const Configuration c = sampler.draw(rng);
    const auto integrand = tree_integrand_log<double>(sampler.tree(), std::span<const double>(c.h),
                                                      c.times, c.momenta, params);
    const double w = signed_weight(integrand, c.log_density);
    return w == 0.0 ? 0.0 : w * insertion(c);
  };

  std::vector<double> totals(batches, 0.0);
  std::uint64_t draws = 0;
  if (mode == TreeMode::Exhaustive) {
    std::vector<ConfigurationSampler> samplers;
    for (const Tree& tree : enumerate_trees(n)) samplers.emplace_back(tree, params, moments);
    const std::size_t units = samplers.size() * batches;
    auto means = parallel_map<double>(units, mc.workers, [&](std::size_t u) {
      const std::size_t tree_index = u / batches;
      const std::uint64_t batch = u % batches;
      Rng rng = substream(mc.seed, {tag, static_cast<std::uint64_t>(n), tree_index, batch});
      double sum = 0.0;
      for (std::uint64_t i = 0; i < mc.batch_size; ++i) sum += accumulate(samplers[tree_index], rng);
      return sum / static_cast<double>(mc.batch_size);
    });
    for (std::size_t u = 0; u < units; ++u) totals[u % batches] += means[u];
    draws = units * mc.batch_size;
  } else {
    const double cayley = std::pow(static_cast<double>(n), n - 2.0);
    totals = parallel_map<double>(batches, mc.workers, [&](std::size_t batch) {
      Rng rng = substream(mc.seed, {tag, static_cast<std::uint64_t>(n), kSampledTreeTag, batch});
      double sum = 0.0;
      for (std::uint64_t i = 0; i < mc.batch_size; ++i) {
        const ConfigurationSampler sampler(sample_tree_uniform(n, rng), params, moments);
        sum += accumulate(sampler, rng);
      }
      return cayley * sum / static_cast<double>(mc.batch_size);
    });
    draws = batches * mc.batch_size;
  }
  const BatchStats stats = batch_stats(totals);
  CoefficientEstimate out;
  out.order = n;
  out.kind = kind;
  out.value = prefactor * stats.mean;
  out.std_error = std::abs(prefactor) * stats.std_error;
  out.samples = draws;
  out.mode = mode;
  return out;
}

ModelParams brownian_at_rest(const ModelParams& params) {
  if (params.kernel != KernelKind::Brownian) {
    throw std::invalid_argument("this series is defined for the translation-invariant (brownian) kernel");
  }
  return params.at_rest();
}

}  // namespace

CoefficientEstimate energy_coefficient(int n, const ModelParams& params, const McConfig& mc) {
  const auto kind = params.kernel == KernelKind::Brownian ? CoefficientKind::EnergyBrownian
                                                          : CoefficientKind::EnergyOscillator;
  return tree_sum_estimate(n, params, mc, kind, kEnergyTag, kExhaustiveEnergyOrder,
                           std::exp(-log_factorial(n)), [](const Configuration&) { return 1.0; });
}

CoefficientEstimate mass_coefficient(int n, const ModelParams& params, const McConfig& mc) {
  const ModelParams rest = brownian_at_rest(params);
  const double prefactor =
      -std::exp(-log_factorial(n) - n * std::log(4.0)) / static_cast<double>(rest.dimension);
  return tree_sum_estimate(n, rest, mc, CoefficientKind::InverseMass, kMassTag,
                           kExhaustiveMassOrder, prefactor, [](const Configuration& c) {
                             const Eigen::VectorXd dipole = c.momenta * (c.times.s - c.times.t);
                             return dipole.squaredNorm();
                           });
}

CoefficientEstimate linear_term_check(const ModelParams& params, const McConfig& mc, int n) {
  const ModelParams rest = brownian_at_rest(params);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(rest.dimension);
  if (params.momentum_norm() > 0.0) {
    e = params.momentum_vector() / params.momentum_norm();
  } else {
    e[0] = 1.0;
  }
  return tree_sum_estimate(n, rest, mc, CoefficientKind::LinearTerm, kLinearTag,
                           kExhaustiveEnergyOrder, std::exp(-log_factorial(n)),
                           [e](const Configuration& c) {
                             return -e.dot(c.momenta * (c.times.s - c.times.t));
                           });
}

double first_order_coefficient(const ModelParams& params) {
  params.validate();
  const int d = params.dimension;
  const auto& cutoff = params.cutoff;
  if (params.kernel == KernelKind::Oscillator) {
    // int dt e^{-r|t| - r^2 (1 - e^{-|t|}) / 2} over R.
    auto f = [](double r) {
      auto g = [r](double t) { return std::exp(-r * t - 0.5 * r * r * -std::expm1(-t)); };
      return 2.0 * integrate_half_line(g, 1e-13).value / r;
    };
    return radial_integral(cutoff, d, f);
  }
  const double p = params.momentum_norm();
  if (p == 0.0) {
    return radial_integral(cutoff, d, [](double r) { return 2.0 / (r * r * (1.0 + 0.5 * r)); });
  }
  // int dt e^{-a|t| + b t} = 2a / (a^2 - b^2), a = r + r^2/2, b = r |P| cos(theta);
  // the angle is averaged with weight (1 - x^2)^{(d-3)/2}.
  const double angular_norm = sphere_area(d - 1) / sphere_area(d);
  auto f = [&](double r) {
    const double a = r + 0.5 * r * r;
    auto g = [&](double x) {
      const double b = r * p * x;
      return std::pow(1.0 - x * x, 0.5 * (d - 3)) * 2.0 * a / (a * a - b * b);
    };
    return angular_norm * integrate(g, -1.0, 1.0, 1e-13).value / r;
  };
  return radial_integral(cutoff, d, f);
}

double first_order_closed_form(const ModelParams& params) {
  if (params.coupling == 0.0) return 0.0;
  return -params.g() * first_order_coefficient(params);
}

double c2_closed_form(const RadialCutoff& cutoff, int d) {
  const double integral = radial_integral(cutoff, d, [](double r) {
    const double q = 1.0 + 0.5 * r;
    return 1.0 / (r * r * q * q * q);
  });
  return -integral / d;
}

SeriesResult ground_state_energy(const ModelParams& params, int n_max, const McConfig& mc) {
  params.validate();
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const bool brownian = params.kernel == KernelKind::Brownian;
  const double lambda = params.coupling;
  const double p = params.momentum_norm();

  SeriesResult out;
  out.coupling = lambda;
  out.momentum_norm = p;
  out.radius = brownian ? lambda0_translation(params.cutoff, params.dimension, p)
                        : lambda0_ho(params.cutoff, params.dimension);
  out.radius_exceeded = std::abs(lambda) >= out.radius;
  if (out.radius_exceeded) out.warnings.push_back("|lambda| is not below the convergence radius");
  out.value = brownian ? 0.5 * p * p : 0.0;
  if (lambda == 0.0) return out;

  double variance = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    auto c = energy_coefficient(n, params, mc);
    const double gn = std::pow(params.g(), n);
    out.value -= gn * c.value;
    variance += gn * gn * c.std_error * c.std_error;
    out.coefficients.push_back(c);
  }
  out.stat_error = std::sqrt(variance);
  out.truncation_bound =
      brownian ? gamma_tail_translation(lambda, p, params.cutoff, params.dimension, n_max + 1).total
               : gamma_tail_oscillator(lambda, params.cutoff, params.dimension, n_max + 1).exact.total;
  return out;
}

SeriesResult effective_mass(const ModelParams& params, int n_max, const McConfig& mc) {
  const ModelParams rest = brownian_at_rest(params);
  rest.validate();
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const double lambda = params.coupling;

  SeriesResult out;
  out.coupling = lambda;
  out.radius = lambda0_translation(rest.cutoff, rest.dimension, 0.0);
  out.radius_exceeded = std::abs(lambda) >= out.radius;
  if (out.radius_exceeded) out.warnings.push_back("|lambda| is not below the convergence radius");
  out.value = 1.0;
  out.inverse_mass = 1.0;
  if (lambda == 0.0) return out;

  double inverse = 1.0, variance = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    auto c = mass_coefficient(n, rest, mc);
    const double l2n = std::pow(lambda * lambda, n);
    inverse += l2n * c.value;
    variance += l2n * l2n * c.std_error * c.std_error;
    out.coefficients.push_back(c);
  }
  if (!(inverse > 0.0)) throw NumericFailure("truncated inverse mass is not positive");
  out.inverse_mass = inverse;
  out.value = 1.0 / inverse;
  out.stat_error = std::sqrt(variance) / (inverse * inverse);
  const double tail = inverse_mass_tail(lambda, rest.cutoff, rest.dimension, n_max + 1);
  out.truncation_bound = tail < inverse ? 1.0 / (inverse - tail) - out.value
                                        : std::numeric_limits<double>::infinity();
  out.heavier_than_free = out.value > 1.0;
  return out;
}

namespace {

// Proposal on the window: times uniform on [0, T]^{2n}, momenta with density
// rho_hat^2 / |k| / M(-1), h uniform.
struct WindowDraw {
  TimeConfig<double> times;
  MomentumConfig<double> momenta;
  std::vector<double> h;
  double log_density;
};

WindowDraw draw_window(int n, double window, const ModelParams& params, double log_m1, Rng& rng) {
  const int d = params.dimension;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  WindowDraw w;
  w.times.convention = TimeConvention::FiniteWindow;
  w.times.window = window;
  w.times.s.resize(n);
  w.times.t.resize(n);
  w.momenta.resize(d, n);
  w.log_density = -2.0 * n * std::log(window);
  for (int j = 0; j < n; ++j) {
    w.times.s[j] = window * unif(rng);
    w.times.t[j] = window * unif(rng);
    const double r = sample_radius(params.cutoff, d - 2.0, rng);
    w.momenta.col(j) = r * sample_direction(d, rng);
    w.log_density += params.cutoff.log_squared(r) - std::log(r) - log_m1;
  }
  w.h.resize(n > 0 ? n - 1 : 0);
  for (auto& v : w.h) v = unif(rng);
  return w;
}

void check_window(int n, double window, const ModelParams& params) {
  params.validate();
  if (n < 0) throw std::invalid_argument("window coefficient order must be >= 0");
  if (!(window > 0.0)) throw std::invalid_argument("window length must be positive");
}

CoefficientEstimate window_tree_impl(int n, double window, const ModelParams& params,
                                     const McConfig& mc, std::uint64_t stream) {
  check_window(n, window, params);
  mc.validate();
  CoefficientEstimate out;
  out.order = n;
  out.kind = CoefficientKind::WindowTree;
  out.mode = TreeMode::Exhaustive;
  if (n == 0) {
    out.value = 0.0;
    return out;
  }
  const double log_m1 = log_moment(params.cutoff, -1.0, params.dimension);
  std::vector<Tree> trees;
  for (const Tree& t : enumerate_trees(n)) trees.push_back(t);
  const std::uint64_t batches = mc.batches();
  const std::size_t units = trees.size() * batches;
  auto means = parallel_map<double>(units, mc.workers, [&](std::size_t u) {
    const std::size_t tree_index = u / batches;
    Rng rng = substream(mc.seed, {kWindowTreeTag, stream, static_cast<std::uint64_t>(n),
                                  tree_index, u % batches});
    double sum = 0.0;
    for (std::uint64_t i = 0; i < mc.batch_size; ++i) {
      const WindowDraw w = draw_window(n, window, params, log_m1, rng);
      const auto integrand = tree_integrand_log<double>(
          trees[tree_index], std::span<const double>(w.h), w.times, w.momenta, params);
      sum += signed_weight(integrand, w.log_density);
    }
    return sum / static_cast<double>(mc.batch_size);
  });
  std::vector<double> totals(batches, 0.0);
  for (std::size_t u = 0; u < units; ++u) totals[u % batches] += means[u];
  const BatchStats stats = batch_stats(totals);
  const double prefactor = std::exp(-log_factorial(n));
  out.value = prefactor * stats.mean;
  out.std_error = prefactor * stats.std_error;
  out.samples = units * mc.batch_size;
  return out;
}

}  // namespace

CoefficientEstimate zt_graph_coefficient(int n, double window, const ModelParams& params,
                                         const McConfig& mc) {
  check_window(n, window, params);
  CoefficientEstimate out;
  out.order = n;
  out.kind = CoefficientKind::WindowGraph;
  out.mode = TreeMode::Exhaustive;
  if (n == 0) {
    out.value = 1.0;
    return out;
  }
  mc.validate();
  const double log_m1 = log_moment(params.cutoff, -1.0, params.dimension);
  const bool brownian = params.kernel == KernelKind::Brownian;
  const Eigen::VectorXd p = params.momentum_vector();
  auto totals = parallel_map<double>(mc.batches(), mc.workers, [&](std::size_t batch) {
    Rng rng = substream(mc.seed, {kGraphTag, static_cast<std::uint64_t>(n), batch});
    double sum = 0.0;
    for (std::uint64_t i = 0; i < mc.batch_size; ++i) {
      const WindowDraw w = draw_window(n, window, params, log_m1, rng);
      const Eigen::MatrixXd a = a_matrix(params.kernel, w.times);
      double log_f = exponent<double>(w.momenta, a, Eigen::MatrixXd::Ones(n, n));
      for (int j = 0; j < n; ++j) {
        const double k = w.momenta.col(j).norm();
        const double dt = w.times.s[j] - w.times.t[j];
        log_f += -k * std::abs(dt) + params.cutoff.log_squared(k) - std::log(k);
        if (brownian) log_f -= w.momenta.col(j).dot(p) * dt;
      }
      sum += std::exp(log_f - w.log_density);
    }
    return sum / static_cast<double>(mc.batch_size);
  });
  const BatchStats stats = batch_stats(totals);
  const double prefactor = std::exp(-log_factorial(n));
  out.value = prefactor * stats.mean;
  out.std_error = prefactor * stats.std_error;
  out.samples = mc.batches() * mc.batch_size;
  return out;
}

CoefficientEstimate window_tree_coefficient(int n, double window, const ModelParams& params,
                                            const McConfig& mc) {
  return window_tree_impl(n, window, params, mc, 0);
}

ExpLogCheck exp_log_check(double window, const ModelParams& params, const McConfig& mc) {
  ExpLogCheck out;
  out.graph = zt_graph_coefficient(2, window, params, mc);
  const auto l2 = window_tree_impl(2, window, params, mc, 0);
  const auto l1a = window_tree_impl(1, window, params, mc, 1);
  const auto l1b = window_tree_impl(1, window, params, mc, 2);
  out.tree_value = l2.value + 0.5 * l1a.value * l1b.value;
  out.tree_error = std::sqrt(l2.std_error * l2.std_error +
                             0.25 * (l1b.value * l1b.value * l1a.std_error * l1a.std_error +
                                     l1a.value * l1a.value * l1b.std_error * l1b.std_error));
  const double combined = std::hypot(out.graph.std_error, out.tree_error);
  out.z_score = combined > 0.0 ? (out.graph.value - out.tree_value) / combined : 0.0;
  return out;
}

}  // namespace nelson
