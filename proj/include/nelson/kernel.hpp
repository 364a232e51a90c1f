#pragma once

#include "nelson/bkar.hpp"
#include "nelson/model.hpp"
#include "nelson/trees.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace nelson {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Momenta k_1..k_n as the columns of a d x n matrix.
template <class Scalar>
using MomentumConfig = Matrix<Scalar>;

enum class TimeConvention {
  /// s_1 pinned to 0, remaining times range over R.
  InfiniteVolume,
  /// All times inside [0, window].
  FiniteWindow,
};

/// Interval endpoints (s_j, t_j) for j = 1..n.
template <class Scalar>
struct TimeConfig {
  Vector<Scalar> s;
  Vector<Scalar> t;
  TimeConvention convention = TimeConvention::InfiniteVolume;
  Scalar window = Scalar(0);

  int size() const { return static_cast<int>(s.size()); }

  void validate() const {
    if (s.size() != t.size()) throw std::invalid_argument("TimeConfig: s and t differ in length");
    if (convention == TimeConvention::InfiniteVolume) {
      if (s.size() > 0 && s[0] != Scalar(0)) {
        throw std::invalid_argument("TimeConfig: infinite-volume convention pins s_1 = 0");
      }
      return;
    }
    for (int i = 0; i < size(); ++i) {
      if (s[i] < 0 || t[i] < 0 || s[i] > window || t[i] > window) {
        throw std::invalid_argument("TimeConfig: finite-window times must lie in [0, T]");
      }
    }
  }
};

/// C(u, v): 1/2 exp(-|u-v|) for the oscillator, min(u, v) for Brownian motion.
template <class Scalar>
Scalar covariance(KernelKind kind, Scalar u, Scalar v) {
  using std::abs, std::exp, std::min;
  return kind == KernelKind::Oscillator ? Scalar(0.5) * exp(-abs(u - v)) : min(u, v);
}

/// Signed overlap sgn(s_i - t_i) sgn(s_j - t_j) |I(s_i, t_i) ∩ I(s_j, t_j)|,
/// equal to the Brownian A_ij for nonnegative times and translation invariant.
template <class Scalar>
Scalar overlap_a(Scalar si, Scalar ti, Scalar sj, Scalar tj) {
  using std::max, std::min;
  auto sgn = [](Scalar x) { return Scalar((x > Scalar(0)) - (x < Scalar(0))); };
  const Scalar lo = max(min(si, ti), min(sj, tj));
  const Scalar hi = min(max(si, ti), max(sj, tj));
  const Scalar length = hi > lo ? hi - lo : Scalar(0);
  return sgn(si - ti) * sgn(sj - tj) * length;
}

/// A_ij = C(s_i,s_j) - C(s_i,t_j) - C(t_i,s_j) + C(t_i,t_j). The Brownian
/// infinite-volume form goes through overlap_a; the finite-window form uses
/// C = min and rejects negative times.
template <class Scalar>
Matrix<Scalar> a_matrix(KernelKind kind, const TimeConfig<Scalar>& times) {
  const int n = times.size();
  if (times.t.size() != n) throw std::invalid_argument("a_matrix: s and t differ in length");
  Matrix<Scalar> a(n, n);
  const bool overlap_form =
      kind == KernelKind::Brownian && times.convention == TimeConvention::InfiniteVolume;
  if (kind == KernelKind::Brownian && !overlap_form) {
    for (int i = 0; i < n; ++i) {
      if (times.s[i] < 0 || times.t[i] < 0) {
        throw std::invalid_argument("a_matrix: Brownian min-form needs nonnegative times");
      }
    }
  }
  const auto& s = times.s;
  const auto& t = times.t;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Scalar v;
      if (overlap_form) {
        v = overlap_a(s[i], t[i], s[j], t[j]);
      } else {
        v = covariance(kind, s[i], s[j]) - covariance(kind, s[i], t[j]) -
            covariance(kind, t[i], s[j]) + covariance(kind, t[i], t[j]);
      }
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

/// -1/2 sum_i |k_i|^2 A_ii - 1/2 sum_{i != j} k_i.k_j A_ij u_ij; nonpositive up
/// to rounding whenever A is PSD and u comes from a forest interpolation.
template <class Scalar>
Scalar exponent(const MomentumConfig<Scalar>& momenta, const Matrix<Scalar>& a,
                const Matrix<Scalar>& u) {
  const Matrix<Scalar> gram = momenta.transpose() * momenta;
  const int n = static_cast<int>(gram.rows());
  Scalar sum(0);
  for (int i = 0; i < n; ++i) {
    sum += gram(i, i) * a(i, i);
    for (int j = i + 1; j < n; ++j) sum += Scalar(2) * gram(i, j) * a(i, j) * u(i, j);
  }
  return Scalar(-0.5) * sum;
}

/// A real number held as sign * exp(log_abs).
template <class Scalar = double>
struct SignedLog {
  Scalar log_abs = -std::numeric_limits<Scalar>::infinity();
  int sign = 0;
  Scalar value() const { return sign == 0 ? Scalar(0) : Scalar(sign) * std::exp(log_abs); }
  static SignedLog zero() { return {}; }
};

/// Log-magnitude and sign of the tree term
///   prod_j exp(-|k_j||s_j-t_j| - (k_j.P)(s_j-t_j)) rho_hat(|k_j|)^2 / |k_j|
///   * prod_{ij in tree} (-k_i.k_j A_ij) * exp(exponent(k, A, u(tree, h))).
/// The oscillator kernel drops the P term. A zero momentum yields zero.
template <class Scalar>
SignedLog<Scalar> tree_integrand_log(const Tree& tree, std::span<const Scalar> h,
                                     const TimeConfig<Scalar>& times,
                                     const MomentumConfig<Scalar>& momenta,
                                     const ModelParams& params) {
  using std::abs, std::log;
  const int n = tree.size();
  if (times.size() != n || momenta.cols() != n) {
    throw std::invalid_argument("tree_integrand: configuration size does not match the tree");
  }
  if (momenta.rows() != params.dimension) {
    throw std::invalid_argument("tree_integrand: momenta must have `dimension` rows");
  }
  const bool with_momentum = params.kernel == KernelKind::Brownian;
  const Vector<Scalar> p = params.momentum_vector().template cast<Scalar>();

  SignedLog<Scalar> out;
  out.sign = 1;
  out.log_abs = Scalar(0);
  for (int j = 0; j < n; ++j) {
    const Scalar knorm = momenta.col(j).norm();
    if (knorm == Scalar(0)) return SignedLog<Scalar>::zero();
    const Scalar rho_log = Scalar(params.cutoff.log_squared(static_cast<double>(knorm)));
    if (!std::isfinite(static_cast<double>(rho_log))) return SignedLog<Scalar>::zero();
    const Scalar dt = times.s[j] - times.t[j];
    Scalar vertex = -knorm * abs(dt) + rho_log - log(knorm);
    if (with_momentum) vertex -= momenta.col(j).dot(p) * dt;
    out.log_abs += vertex;
  }
  const Matrix<Scalar> a = a_matrix(params.kernel, times);
  for (const auto& e : tree.edges()) {
    const Scalar factor = -momenta.col(e.a).dot(momenta.col(e.b)) * a(e.a, e.b);
    if (factor == Scalar(0)) return SignedLog<Scalar>::zero();
    if (factor < Scalar(0)) out.sign = -out.sign;
    out.log_abs += log(abs(factor));
  }
  const Matrix<Scalar> u = interpolation_matrix<Scalar>(tree, h);
  out.log_abs += exponent<Scalar>(momenta, a, u);
  return out;
}

template <class Scalar>
Scalar tree_integrand(const Tree& tree, std::span<const Scalar> h, const TimeConfig<Scalar>& times,
                      const MomentumConfig<Scalar>& momenta, const ModelParams& params) {
  return tree_integrand_log<Scalar>(tree, h, times, momenta, params).value();
}

}  // namespace nelson
