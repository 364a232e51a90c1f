#pragma once

#include "nelson/model.hpp"

#include <vector>

namespace nelson {

/// Majorant for |g^n T_n| summed from `from_order` on.
struct TailBound {
  int from_order = 1;
  /// Bounds for orders from_order, from_order + 1, ... (explicitly listed).
  std::vector<double> terms;
  /// Sum of `terms` plus a geometric remainder; +inf when ratio >= 1.
  double total = 0.0;
  /// Asymptotic ratio between consecutive terms.
  double ratio = 0.0;
  /// Coupling radius at which `ratio` reaches 1.
  double radius = 0.0;
};

/// Number of orders listed explicitly before the geometric remainder.
inline constexpr int kExplicitTailTerms = 40;

/// (2 e Lambda^2)^{-1/2}.
double lambda0_ho(const RadialCutoff& cutoff, int d);

/// 1/2 (1-|P|)^{3/2} M(-2)^{-1/2}: the radius at which the ratio of the
/// translation-invariant Gamma terms reaches 1.
double lambda0_translation(const RadialCutoff& cutoff, int d, double p_norm);

/// 1/2 (1-|P|)^{-3/2} M(-2)^{-1/2}, the analyticity-radius variant with the
/// inverted momentum factor. Agrees with lambda0_translation at P = 0 only.
double lambda0_theorem(const RadialCutoff& cutoff, int d, double p_norm);

/// Order-n Gamma term for the Brownian series:
///   n = 1:  lambda^2 M(-2) / (2 (1-|P|))
///   n >= 2: (lambda^2/4)^n 2^{4n-2} / (n (n-1)) (1-|P|)^{-3n+2} M(-2)^n
double gamma_term_translation(int n, double lambda, double p_norm, double m_minus2);

TailBound gamma_tail_translation(double lambda, double p_norm, const RadialCutoff& cutoff, int d,
                                 int from_order);

struct OscillatorTail {
  /// Terms (lambda^2/4)^n / n! 4^{n-1} 2^n Lambda^{2n-2} n^{n-2} (n = 1 uses
  /// 2 M(-2)); total closes with the majorant remainder.
  TailBound exact;
  /// Same with n^{n-2} replaced by n! e^{n-2}; ratio (lambda / lambda0_ho)^2.
  TailBound majorant;
};

OscillatorTail gamma_tail_oscillator(double lambda, const RadialCutoff& cutoff, int d,
                                     int from_order);

/// Bound on |sum_{n >= from_order} c_{2n} lambda^{2n}| for the inverse mass.
/// The Gamma bound holds for complex P, so a Cauchy estimate on the circle
/// |P| = r gives 2 Gamma_{>=N}(lambda, r) / r^2, minimised over r in (0, 1).
double inverse_mass_tail(double lambda, const RadialCutoff& cutoff, int d, int from_order);

}  // namespace nelson
