#include "nelson/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nelson {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Ratios within this distance of 1 count as reaching the radius.
constexpr double kRatioSlack = 1e-12;

void check_momentum(double p_norm) {
  if (!(p_norm >= 0.0 && p_norm < 1.0)) throw std::invalid_argument("radius needs 0 <= |P| < 1");
}

double geometric_close(double last_term, double ratio) {
  if (ratio >= 1.0 - kRatioSlack) return last_term == 0.0 ? 0.0 : kInf;
  return last_term * ratio / (1.0 - ratio);
}

}  // namespace

double lambda0_ho(const RadialCutoff& cutoff, int d) {
  const double big_lambda = capital_lambda(cutoff, d).value;
  return 1.0 / std::sqrt(2.0 * std::exp(1.0) * big_lambda * big_lambda);
}

double lambda0_translation(const RadialCutoff& cutoff, int d, double p_norm) {
  check_momentum(p_norm);
  return 0.5 * std::pow(1.0 - p_norm, 1.5) / std::sqrt(moment(cutoff, -2.0, d));
}

double lambda0_theorem(const RadialCutoff& cutoff, int d, double p_norm) {
  check_momentum(p_norm);
  return 0.5 * std::pow(1.0 - p_norm, -1.5) / std::sqrt(moment(cutoff, -2.0, d));
}

double gamma_term_translation(int n, double lambda, double p_norm, double m_minus2) {
  if (n < 1) throw std::invalid_argument("gamma term order must be >= 1");
  if (lambda == 0.0) return 0.0;
  const double l2 = lambda * lambda;
  if (n == 1) return l2 * m_minus2 / (2.0 * (1.0 - p_norm));
  const double log_term = n * std::log(0.25 * l2) + (4.0 * n - 2.0) * std::log(2.0) -
                          std::log(static_cast<double>(n) * (n - 1)) +
                          (2.0 - 3.0 * n) * std::log1p(-p_norm) + n * std::log(m_minus2);
  return std::exp(log_term);
}

TailBound gamma_tail_translation(double lambda, double p_norm, const RadialCutoff& cutoff, int d,
                                 int from_order) {
  check_momentum(p_norm);
  if (from_order < 1) throw std::invalid_argument("from_order must be >= 1");
  const double m = moment(cutoff, -2.0, d);
  TailBound out;
  out.from_order = from_order;
  out.radius = lambda0_translation(cutoff, d, p_norm);
  out.ratio = 4.0 * lambda * lambda * m / std::pow(1.0 - p_norm, 3.0);
  double sum = 0.0;
  for (int n = from_order; n < from_order + kExplicitTailTerms; ++n) {
    out.terms.push_back(gamma_term_translation(n, lambda, p_norm, m));
    sum += out.terms.back();
  }
  // Consecutive ratios for n >= 2 are ratio (n-1)/(n+1) < ratio.
  out.total = sum + geometric_close(out.terms.back(), out.ratio);
  return out;
}

OscillatorTail gamma_tail_oscillator(double lambda, const RadialCutoff& cutoff, int d,
                                     int from_order) {
  if (from_order < 1) throw std::invalid_argument("from_order must be >= 1");
  const double big_lambda = capital_lambda(cutoff, d).value;
  const double m = moment(cutoff, -2.0, d);
  const double g = 0.25 * lambda * lambda;
  const double radius = lambda0_ho(cutoff, d);

  auto log_common = [&](int n) {
    return n * std::log(g) + (n - 1.0) * std::log(4.0) + n * std::log(2.0) +
           (2.0 * n - 2.0) * std::log(big_lambda);
  };
  auto exact_term = [&](int n) {
    if (g == 0.0) return 0.0;
    if (n == 1) return g * 2.0 * m;
    return std::exp(log_common(n) - std::lgamma(n + 1.0) + (n - 2.0) * std::log(n));
  };
  auto majorant_term = [&](int n) {
    if (g == 0.0) return 0.0;
    if (n == 1) return g * 2.0 * m;
    return std::exp(log_common(n) + (n - 2.0));
  };

  OscillatorTail out;
  for (TailBound* tb : {&out.exact, &out.majorant}) {
    tb->from_order = from_order;
    tb->radius = radius;
    tb->ratio = (lambda / radius) * (lambda / radius);
  }
  double exact_sum = 0.0, major_sum = 0.0;
  for (int n = from_order; n < from_order + kExplicitTailTerms; ++n) {
    out.exact.terms.push_back(exact_term(n));
    out.majorant.terms.push_back(majorant_term(n));
    exact_sum += out.exact.terms.back();
    major_sum += out.majorant.terms.back();
  }
  // Majorant terms from n = 2 on are exactly geometric with this ratio.
  const double last_majorant = out.majorant.terms.back();
  out.exact.total = exact_sum + geometric_close(last_majorant, out.exact.ratio);
  out.majorant.total = major_sum + geometric_close(last_majorant, out.majorant.ratio);
  return out;
}

double inverse_mass_tail(double lambda, const RadialCutoff& cutoff, int d, int from_order) {
  if (lambda == 0.0) return 0.0;
  double best = kInf;
  for (int i = 1; i < 100; ++i) {
    const double r = 0.01 * i;
    const double tail = gamma_tail_translation(lambda, r, cutoff, d, from_order).total;
    best = std::min(best, 2.0 * tail / (r * r));
  }
  return best;
}

}  // namespace nelson
