#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace nelson {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1] (QUADPACK qk15 tables).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over the finite interval
/// [a, b]. Stops once the summed error estimate is below
/// max(abs_tol, rel_tol * |value|), or throws when max_segments is reached.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                           double abs_tol = 0.0, int max_segments = 4000) {
  if (!(a <= b)) throw std::invalid_argument("integrate: require a <= b");
  if (a == b) return {};
  std::priority_queue<detail::Segment> queue;
  auto first = detail::kronrod15(f, a, b);
  double value = first.value;
  double error = first.error;
  int evaluations = 15;
  queue.push(first);
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(queue.size()) >= max_segments) {
      throw std::runtime_error("integrate: subdivision limit reached");
    }
    const auto worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // interval at machine resolution
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum to shed the accumulated cancellation from the running updates.
  double total = 0.0;
  double total_error = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    total_error += queue.top().error;
    queue.pop();
  }
  return {total, total_error, evaluations};
}

/// Integral of f over [0, inf) through the map x = u / (1 - u).
template <class F>
QuadratureResult integrate_half_line(F&& f, double rel_tol = 1e-12, double abs_tol = 0.0) {
  auto mapped = [&f](double u) {
    if (u >= 1.0) return 0.0;
    const double one_minus = 1.0 - u;
    const double x = u / one_minus;
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, rel_tol, abs_tol);
}

}  // namespace nelson
