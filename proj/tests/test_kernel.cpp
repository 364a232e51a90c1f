#include "doctest.h"

#include "nelson/kernel.hpp"
#include "nelson/sampling.hpp"

#include <cmath>

using namespace nelson;

namespace {

TimeConfig<double> times_of(std::vector<double> s, std::vector<double> t,
                            TimeConvention conv = TimeConvention::FiniteWindow, double window = 10) {
  TimeConfig<double> out;
  out.s = Eigen::Map<Eigen::VectorXd>(s.data(), s.size());
  out.t = Eigen::Map<Eigen::VectorXd>(t.data(), t.size());
  out.convention = conv;
  out.window = window;
  return out;
}

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("A matrix examples") {
    const auto a = a_matrix(KernelKind::Brownian, times_of({0, 1}, {2, 3}));
    CHECK(a(0, 1) == doctest::Approx(1.0));
    const auto z = a_matrix(KernelKind::Brownian, times_of({0, 1.5}, {2, 1.5}));
    CHECK(z.row(1).isZero());
    CHECK(z.col(1).isZero());
    const auto o = a_matrix(KernelKind::Oscillator, times_of({0}, {std::log(2.0)}));
    CHECK(o(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(a_matrix(KernelKind::Brownian, times_of({-1}, {1})), std::invalid_argument);
  }

  TEST_CASE("signed overlap") {
    CHECK(overlap_a(0.0, 2.0, 1.0, 3.0) == 1.0);
    CHECK(overlap_a(0.0, 1.0, 2.0, 3.0) == 0.0);
    CHECK(overlap_a(0.0, 2.0, 3.0, 1.0) == -1.0);
    // agrees with the min-form for nonnegative times
    Rng rng = substream(2, {7});
    std::uniform_real_distribution<double> when(0.0, 5.0);
    for (int i = 0; i < 2000; ++i) {
      const double s1 = when(rng), t1 = when(rng), s2 = when(rng), t2 = when(rng);
      const auto a = a_matrix(KernelKind::Brownian, times_of({s1, s2}, {t1, t2}));
      CHECK(std::abs(overlap_a(s1, t1, s2, t2) - a(0, 1)) <= 1e-12);
    }
  }

  TEST_CASE("exponent sign") {
    Eigen::MatrixXd k(3, 1);
    k << 0.3, -1.0, 0.5;
    const auto a = a_matrix(KernelKind::Oscillator, times_of({0}, {1.2}));
    CHECK(exponent<double>(k, a, Eigen::MatrixXd::Ones(1, 1)) ==
          doctest::Approx(-0.5 * k.squaredNorm() * a(0, 0)));
    Rng rng = substream(4, {4});
    std::uniform_real_distribution<double> when(-3.0, 3.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal;
    for (int c = 0; c < 2000; ++c) {
      const auto kind = c % 2 ? KernelKind::Oscillator : KernelKind::Brownian;
      const int n = 1 + c % 6;
      const Tree tree = sample_tree_uniform(n, rng);
      std::vector<double> h(tree.edges().size());
      for (auto& x : h) x = c % 3 == 0 ? 1.0 : unif(rng);
      auto tc = times_of(std::vector<double>(n), std::vector<double>(n),
                         TimeConvention::InfiniteVolume);
      for (int j = 0; j < n; ++j) {
        tc.s[j] = j == 0 ? 0.0 : when(rng);
        tc.t[j] = when(rng);
      }
      Eigen::MatrixXd m(3, n);
      for (int j = 0; j < n; ++j) {
        for (int r = 0; r < 3; ++r) m(r, j) = normal(rng);
      }
      const auto a = a_matrix(kind, tc);
      CHECK(exponent<double>(m, a, interpolation_matrix<double>(tree, h)) <= 1e-12);
    }
  }

  TEST_CASE("single-vertex integrand") {
    ModelParams p;
    auto tc = times_of({0.0}, {-0.8}, TimeConvention::InfiniteVolume);
    Eigen::MatrixXd k(3, 1);
    k << 0.3, 0.4, 0.0;  // |k| = 0.5
    const double got = tree_integrand<double>(Tree(1, {}), {}, tc, k, p);
    const double want = std::exp(-0.5 * 0.8) / 0.5 * std::exp(-0.5 * 0.25 * 0.8);
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
    // outside the sharp support
    k << 1.0, 0.5, 0.0;
    CHECK(tree_integrand<double>(Tree(1, {}), {}, tc, k, p) == 0.0);
  }

  TEST_CASE("a zero-length interval on an edge kills the term") {
    ModelParams p;
    auto tc = times_of({0.0, 0.4}, {1.0, 0.4}, TimeConvention::InfiniteVolume);
    Eigen::MatrixXd k(3, 2);
    k << 0.3, 0.2, 0.1, -0.4, 0.2, 0.1;
    const std::vector<double> h{0.6};
    CHECK(tree_integrand<double>(Tree(2, {{0, 1}}), h, tc, k, p) == 0.0);
  }

  TEST_CASE("two-vertex integrand, independent evaluation") {
    ModelParams p;
    p.momentum = Eigen::Vector3d(0.1, -0.2, 0.05);
    const double s2 = -0.3, t1 = 1.1, t2 = 0.7;
    auto tc = times_of({0.0, s2}, {t1, t2}, TimeConvention::InfiniteVolume);
    const Eigen::Vector3d k1(0.3, 0.1, -0.2), k2(-0.1, 0.4, 0.2);
    Eigen::MatrixXd k(3, 2);
    k << k1, k2;
    const std::vector<double> h{1.0};
    // intervals [0, 1.1] (s < t, sign -1) and [-0.3, 0.7] (sign -1): overlap 0.7
    const double a11 = 1.1, a22 = 1.0, a12 = 0.7;
    const double v1 = std::exp(-k1.norm() * 1.1 - k1.dot(p.momentum) * (0.0 - t1)) / k1.norm();
    const double v2 = std::exp(-k2.norm() * 1.0 - k2.dot(p.momentum) * (s2 - t2)) / k2.norm();
    const double edge = -k1.dot(k2) * a12;
    const double quad = -0.5 * (k1.squaredNorm() * a11 + k2.squaredNorm() * a22) - k1.dot(k2) * a12;
    const double want = v1 * v2 * edge * std::exp(quad);
    CHECK(tree_integrand<double>(Tree(2, {{0, 1}}), h, tc, k, p) ==
          doctest::Approx(want).epsilon(1e-13));
  }

  TEST_CASE("A is positive semidefinite") {
    Rng rng = substream(8, {8});
    std::uniform_real_distribution<double> when(0.0, 4.0);
    for (int c = 0; c < 2000; ++c) {
      const auto kind = c % 2 ? KernelKind::Oscillator : KernelKind::Brownian;
      const int n = 1 + c % 8;
      auto tc = times_of(std::vector<double>(n), std::vector<double>(n));
      for (int j = 0; j < n; ++j) {
        tc.s[j] = when(rng);
        tc.t[j] = when(rng);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_matrix(kind, tc));
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
  }

  TEST_CASE("time configuration validation") {
    auto tc = times_of({0.5}, {1.0}, TimeConvention::InfiniteVolume);
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
    auto w = times_of({0.5}, {11.0}, TimeConvention::FiniteWindow, 10.0);
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  }
}
