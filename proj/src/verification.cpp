#include "nelson/verification.hpp"

#include "nelson/bkar.hpp"
#include "nelson/expansion.hpp"
#include "nelson/kernel.hpp"
#include "nelson/lemmas.hpp"
#include "nelson/sampling.hpp"
#include "nelson/trees.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace nelson {

namespace {

enum VerifyTag : std::uint64_t {
  kPartitionTag = 31,
  kBkarTag = 32,
  kPositivityTag = 33,
  kOverlapTag = 34,
  kTreeLemmaSetupTag = 35,
  kSpectrumTag = 36,
};

Eigen::MatrixXd gaussian_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

CheckResult make(std::string name, double measured, double tolerance, std::string unit,
                 std::uint64_t instances) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tolerance;
  r.unit = std::move(unit);
  r.instances = instances;
  r.passed = std::isfinite(measured) && measured <= tolerance;
  return r;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json VerifyReport::to_json() const {
  Json list = Json::array();
  for (const auto& c : checks) {
    list.push_back(Json{{"name", c.name},
                        {"passed", c.passed},
                        {"measured", c.measured},
                        {"tolerance", c.tolerance},
                        {"unit", c.unit},
                        {"instances", c.instances}});
  }
  return Json{{"passed", passed()}, {"checks", list}};
}

CheckResult check_cayley_counts(int max_n) {
  // measured = number of mismatching counts
  double mismatches = 0;
  std::uint64_t checked = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::uint64_t listed = 0;
    for (auto it = enumerate_trees(n).begin(); it != std::default_sentinel; ++it) ++listed;
    if (listed != cayley_count(n)) ++mismatches;
    if (n >= 2) {
      std::uint64_t by_degree = 0;
      for_each_degree_sequence(n, [&](std::span<const int> seq) {
        by_degree += count_trees_with_degrees(seq);
      });
      if (by_degree != cayley_count(n)) ++mismatches;
    }
    ++checked;
  }
  return make("cayley_counts", mismatches, 0.0, "mismatched counts", checked);
}

CheckResult check_partition_decomposition(int instances, std::uint64_t seed) {
  Rng rng = substream(seed, {kPartitionTag});
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int n = size(rng);
    // random forest: a random tree with each edge kept with probability 1/2
    const Tree tree = sample_tree_uniform(n, rng);
    std::vector<Edge> kept;
    for (const auto& e : tree.edges()) {
      if (unif(rng) < 0.5) kept.push_back(e);
    }
    std::vector<double> h(kept.size());
    for (auto& x : h) x = unif(rng);
    // exercise ties and the endpoints
    if (h.size() > 1 && unif(rng) < 0.3) h[1] = h[0];
    if (!h.empty() && unif(rng) < 0.1) h[0] = 1.0;
    const InterpolationWeights w(Forest(n, kept), h);
    const auto parts = partition_decomposition(w);
    Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(n, n);
    double total = 0.0;
    for (const auto& p : parts) {
      if (p.weight < 0.0) worst = std::max(worst, 1.0);
      total += p.weight;
      rebuilt += p.weight * partition_indicator(p.blocks, n);
    }
    worst = std::max(worst, std::abs(total - 1.0));
    worst = std::max(worst, (rebuilt - interpolation_matrix(w)).cwiseAbs().maxCoeff());
  }
  return make("partition_decomposition", worst, 1e-14, "max abs error", instances);
}

CheckResult check_bkar(int n, int instances, std::uint64_t seed) {
  Rng rng = substream(seed, {kBkarTag, static_cast<std::uint64_t>(n)});
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    // Scaled so F(1) stays O(0.1..1) and an absolute tolerance means something.
    const Eigen::MatrixXd b = gaussian_matrix(n, n, rng, 0.7 / std::sqrt(double(n)));
    const Eigen::MatrixXd a = b.transpose() * b;
    const Eigen::MatrixXd k = gaussian_matrix(3, n, rng, 0.7);
    const auto sides = bkar_check(a, k);
    worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
  }
  return make("bkar_identity_n" + std::to_string(n), worst, 1e-6, "max |lhs - rhs|", instances);
}

CheckResult check_positivity(int configs, std::uint64_t seed) {
  Rng rng = substream(seed, {kPositivityTag});
  std::uniform_int_distribution<int> size(2, 6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> when(-3.0, 3.0);
  double worst_exponent = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < configs; ++c) {
    const KernelKind kind = (c % 2) ? KernelKind::Oscillator : KernelKind::Brownian;
    const int n = size(rng);
    const Tree tree = sample_tree_uniform(n, rng);
    std::vector<double> h(tree.edges().size());
    for (auto& x : h) x = unif(rng);
    TimeConfig<double> times;
    times.s.resize(n);
    times.t.resize(n);
    for (int j = 0; j < n; ++j) {
      times.s[j] = j == 0 ? 0.0 : when(rng);
      times.t[j] = when(rng);
    }
    const Eigen::MatrixXd a = a_matrix(kind, times);
    const Eigen::MatrixXd u = interpolation_matrix<double>(tree, h);
    const Eigen::MatrixXd k = gaussian_matrix(3, n, rng);
    // exponent carries the -1/2, so a nonnegative quadratic form means <= 0
    worst_exponent = std::max(worst_exponent, exponent<double>(k, a, u));
  }
  return make("positivity", worst_exponent, 1e-12, "max exponent",
              static_cast<std::uint64_t>(configs));
}

CheckResult check_a_matrix_spectrum(int configs, std::uint64_t seed) {
  Rng rng = substream(seed, {kSpectrumTag});
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> when(-3.0, 3.0);
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    const KernelKind kind = (c % 2) ? KernelKind::Oscillator : KernelKind::Brownian;
    const int n = size(rng);
    TimeConfig<double> times;
    times.s.resize(n);
    times.t.resize(n);
    for (int j = 0; j < n; ++j) {
      times.s[j] = j == 0 ? 0.0 : when(rng);
      times.t[j] = when(rng);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_matrix(kind, times),
                                                       Eigen::EigenvaluesOnly);
    worst = std::max(worst, -eig.eigenvalues().minCoeff());
  }
  return make("a_matrix_psd", worst, 1e-10, "max negative eigenvalue",
              static_cast<std::uint64_t>(configs));
}

CheckResult check_overlap(std::uint64_t instances, std::uint64_t seed,
                          const OverlapFunction& overlap) {
  const OverlapFunction f =
      overlap ? overlap : [](double a, double b, double c, double d) { return overlap_a(a, b, c, d); };
  Rng rng = substream(seed, {kOverlapTag});
  std::uniform_real_distribution<double> when(0.0, 10.0);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    const double si = when(rng), ti = when(rng), sj = when(rng), tj = when(rng);
    const double min_form = std::min(si, sj) - std::min(si, tj) - std::min(ti, sj) + std::min(ti, tj);
    worst = std::max(worst, std::abs(f(si, ti, sj, tj) - min_form));
  }
  return make("overlap_lemma", worst, 1e-12, "max abs error", instances);
}

CheckResult check_interval_lemma(std::uint64_t samples, std::uint64_t seed, double sigma) {
  double worst = 0.0;
  for (int p : {0, 1, 2}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      const auto est = interval_integral_mc(p, mu, 0.3, 1.7, samples, seed);
      worst = std::max(worst, std::abs(est.z_score()));
    }
  }
  return make("interval_integral_lemma", worst, sigma, "max |z|", 9);
}

CheckResult check_tree_lemma(int trees, std::uint64_t samples, std::uint64_t seed, double sigma) {
  Rng rng = substream(seed, {kTreeLemmaSetupTag});
  std::uniform_int_distribution<int> size(2, 5);
  std::uniform_real_distribution<double> norm(0.5, 2.0);
  double worst = 0.0;
  for (int i = 0; i < trees; ++i) {
    const int n = size(rng);
    const Tree tree = sample_tree_uniform(n, rng);
    Eigen::MatrixXd k(3, n);
    for (int j = 0; j < n; ++j) k.col(j) = norm(rng) * sample_direction(3, rng);
    for (double p : {0.0, 0.3}) {
      const auto est = tree_time_integral_mc(tree, k, p, samples, seed);
      worst = std::max(worst, std::abs(est.z_score()));
    }
  }
  return make("tree_time_lemma", worst, sigma, "max |z|", static_cast<std::uint64_t>(2 * trees));
}

CheckResult check_exp_log(const ModelParams& model, std::uint64_t samples, std::uint64_t seed,
                          int workers, double sigma) {
  ModelParams osc = model;
  osc.kernel = KernelKind::Oscillator;
  osc.momentum = Eigen::VectorXd::Zero(osc.dimension);
  McConfig mc;
  mc.samples = samples;
  mc.batch_size = std::max<std::uint64_t>(1, samples / 64);
  mc.seed = seed;
  mc.workers = workers;
  const auto r = exp_log_check(1.0, osc, mc);
  return make("exp_log_consistency", std::abs(r.z_score), sigma, "|z|", samples);
}

VerifyReport run_verify(const RunConfig& config, const OverlapFunction& overlap) {
  const auto& v = config.verify;
  const std::uint64_t seed = config.mc.seed;
  VerifyReport report;
  report.checks.push_back(check_cayley_counts(8));
  report.checks.push_back(check_partition_decomposition(1000, seed));
  for (int n : {2, 3, 4}) report.checks.push_back(check_bkar(n, v.bkar_instances, seed));
  report.checks.push_back(check_positivity(v.positivity_configs, seed));
  report.checks.push_back(check_a_matrix_spectrum(v.positivity_configs, seed));
  report.checks.push_back(check_overlap(v.overlap_instances, seed, overlap));
  report.checks.push_back(check_interval_lemma(v.lemma_samples, seed, v.sigma));
  report.checks.push_back(check_tree_lemma(v.tree_lemma_trees, v.tree_lemma_samples, seed, v.sigma));
  report.checks.push_back(
      check_exp_log(config.model, v.exp_log_samples, seed, config.mc.workers, v.sigma));
  return report;
}

}  // namespace nelson
