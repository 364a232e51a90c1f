#pragma once

#include "nelson/config.hpp"
#include "nelson/json_writer.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nelson {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst observed discrepancy (absolute error, |z| or a count, see unit).
  double measured = 0.0;
  double tolerance = 0.0;
  std::string unit;
  std::uint64_t instances = 0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  Json to_json() const;
};

/// Signature of overlap_a; replaceable so a faulty version can be injected.
using OverlapFunction = std::function<double(double, double, double, double)>;

CheckResult check_cayley_counts(int max_n = 8);
CheckResult check_partition_decomposition(int instances, std::uint64_t seed);
/// 20-instance style check at one n in {2, 3, 4}; |lhs - rhs| <= 1e-6.
CheckResult check_bkar(int n, int instances, std::uint64_t seed);
/// exponent <= 1e-12 over random tree configurations with n <= 6, both kernels.
CheckResult check_positivity(int configs, std::uint64_t seed);
/// min eig(A) >= -1e-10 over random times, n <= 8, both kernels.
CheckResult check_a_matrix_spectrum(int configs, std::uint64_t seed);
/// Signed overlap against the min-covariance form on nonnegative times, 1e-12.
CheckResult check_overlap(std::uint64_t instances, std::uint64_t seed,
                          const OverlapFunction& overlap = {});
/// Nine (p, mu) points; measured is max |z|.
CheckResult check_interval_lemma(std::uint64_t samples, std::uint64_t seed, double sigma);
/// Random trees with n <= 5 at |P| in {0, 0.3}; measured is max |z|.
CheckResult check_tree_lemma(int trees, std::uint64_t samples, std::uint64_t seed, double sigma);
/// Order-2 window coefficient of Z_T against the resummed tree terms at T = 1
/// for the oscillator kernel.
CheckResult check_exp_log(const ModelParams& model, std::uint64_t samples, std::uint64_t seed,
                          int workers, double sigma);

VerifyReport run_verify(const RunConfig& config, const OverlapFunction& overlap = {});

}  // namespace nelson
