#include "nelson/model.hpp"

#include "nelson/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nelson {

std::string to_string(CutoffFamily family) {
  switch (family) {
    case CutoffFamily::Sharp: return "sharp";
    case CutoffFamily::Gaussian: return "gaussian";
    case CutoffFamily::PowerLaw: return "powerlaw";
  }
  return "unknown";
}

std::string to_string(KernelKind kind) {
  return kind == KernelKind::Oscillator ? "oscillator" : "brownian";
}

RadialCutoff::RadialCutoff(CutoffFamily family, double scale, double exponent, double amplitude)
    : family_(family), scale_(scale), exponent_(exponent), amplitude_(amplitude) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("cutoff scale must be positive and finite");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("cutoff amplitude must be positive and finite");
  }
  if (family == CutoffFamily::PowerLaw && !(exponent > 0.0)) {
    throw std::invalid_argument("powerlaw exponent must be positive");
  }
}

RadialCutoff RadialCutoff::sharp(double radius, double amplitude) {
  return {CutoffFamily::Sharp, radius, 0.0, amplitude};
}

RadialCutoff RadialCutoff::gaussian(double width, double amplitude) {
  return {CutoffFamily::Gaussian, width, 0.0, amplitude};
}

RadialCutoff RadialCutoff::power_law(double exponent, double scale, double amplitude) {
  return {CutoffFamily::PowerLaw, scale, exponent, amplitude};
}

double RadialCutoff::operator()(double r) const {
  switch (family_) {
    case CutoffFamily::Sharp: return r <= scale_ ? amplitude_ : 0.0;
    case CutoffFamily::Gaussian: return amplitude_ * std::exp(-0.5 * r * r / (scale_ * scale_));
    case CutoffFamily::PowerLaw: return amplitude_ * std::pow(1.0 + r / scale_, -exponent_);
  }
  return 0.0;
}

double RadialCutoff::squared(double r) const {
  const double v = (*this)(r);
  return v * v;
}

double RadialCutoff::log_squared(double r) const {
  const double log_amp = 2.0 * std::log(amplitude_);
  switch (family_) {
    case CutoffFamily::Sharp:
      return r <= scale_ ? log_amp : -std::numeric_limits<double>::infinity();
    case CutoffFamily::Gaussian: return log_amp - r * r / (scale_ * scale_);
    case CutoffFamily::PowerLaw: return log_amp - 2.0 * exponent_ * std::log1p(r / scale_);
  }
  return -std::numeric_limits<double>::infinity();
}

double RadialCutoff::support_radius() const {
  return family_ == CutoffFamily::Sharp ? scale_ : std::numeric_limits<double>::infinity();
}

double RadialCutoff::effective_radius() const {
  switch (family_) {
    case CutoffFamily::Sharp: return scale_;
    case CutoffFamily::Gaussian: return scale_ * std::sqrt(30.0 * std::log(10.0));
    case CutoffFamily::PowerLaw: return scale_ * (std::pow(10.0, 15.0 / exponent_) - 1.0);
  }
  return scale_;
}

RadialCutoff RadialCutoff::scaled(double factor) const {
  return {family_, scale_, exponent_, amplitude_ * factor};
}

double sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace {

// log of int_0^upper r^a rho_hat(r)^2 dr for a > -1 on a finite range; the
// integrand is rescaled by its maximum so large a does not overflow.
double log_radial_segment(const RadialCutoff& cutoff, double a, double lower, double upper) {
  if (upper <= lower) return -std::numeric_limits<double>::infinity();
  const bool singular = a < 0.0 && lower == 0.0;
  auto log_f = [&](double r) {
    if (singular) return cutoff.log_squared(r);
    if (r <= 0.0) return a == 0.0 ? cutoff.log_squared(0.0) : -std::numeric_limits<double>::infinity();
    return a * std::log(r) + cutoff.log_squared(r);
  };
  // Coarse scan for the log-maximum (the integrand is unimodal for the
  // registered families).
  double shift = -std::numeric_limits<double>::infinity();
  constexpr int kScan = 400;
  for (int i = 0; i <= kScan; ++i) {
    const double r = lower + (upper - lower) * i / kScan;
    shift = std::max(shift, log_f(r));
  }
  if (!std::isfinite(shift)) shift = 0.0;

  QuadratureResult result;
  if (singular) {
    // r = x^{1/(a+1)} removes the integrable singularity at the origin.
    const double e = a + 1.0;
    auto g = [&](double x) {
      if (x <= 0.0) return 0.0;
      const double r = std::pow(x, 1.0 / e);
      return std::exp(cutoff.log_squared(r) - shift) / e;
    };
    result = integrate(g, 0.0, std::pow(upper, e), 1e-13);
  } else {
    auto g = [&](double r) { return std::exp(log_f(r) - shift); };
    result = integrate(g, lower, upper, 1e-13);
  }
  return shift + std::log(result.value);
}

double log_sum_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace

double log_moment(const RadialCutoff& cutoff, double p, int d) {
  if (d < 1) throw std::invalid_argument("moment: dimension must be >= 1");
  if (p <= -d) {
    throw DivergentIntegral("moment M(p) diverges at the origin for p <= -d");
  }
  const double a = d - 1 + p;  // radial exponent
  const double log_area = std::log(sphere_area(d));
  const double sigma = cutoff.scale();

  switch (cutoff.family()) {
    case CutoffFamily::Sharp:
      return log_area + log_radial_segment(cutoff, a, 0.0, sigma);
    case CutoffFamily::Gaussian: {
      // Beyond R the integrand is below exp(-81) of its peak value.
      const double upper = sigma * (std::sqrt(std::max(a, 0.0) / 2.0) + 9.0);
      return log_area + log_radial_segment(cutoff, a, 0.0, upper);
    }
    case CutoffFamily::PowerLaw: {
      const double alpha = cutoff.exponent();
      const double e = 2.0 * alpha - a - 2.0;  // tail exponent after r = R/u
      if (!(e > -1.0)) {
        throw DivergentIntegral("moment M(p) diverges at infinity for the powerlaw cutoff");
      }
      const double upper = sigma * std::max(1.0, a + 1.0);
      const double head = log_radial_segment(cutoff, a, 0.0, upper);
      // Tail: int_R^inf r^a (1 + r/kappa)^{-2 alpha} dr
      //     = R^{a+1} / (e+1) * int_0^1 (v^{1/(e+1)} + R/kappa)^{-2 alpha} dv.
      const double ratio = upper / sigma;
      auto g = [&](double v) {
        const double u = std::pow(v, 1.0 / (e + 1.0));
        return std::exp(-2.0 * alpha * (std::log(u + ratio) - std::log(ratio)));
      };
      const auto tail = integrate(g, 0.0, 1.0, 1e-13);
      const double log_tail = (a + 1.0) * std::log(upper) - std::log(e + 1.0) +
                              2.0 * std::log(cutoff.amplitude()) -
                              2.0 * alpha * std::log(ratio) + std::log(tail.value);
      return log_area + log_sum_exp(head, log_tail);
    }
  }
  throw std::logic_error("unknown cutoff family");
}

double moment(const RadialCutoff& cutoff, double p, int d) {
  const double value = std::exp(log_moment(cutoff, p, d));
  if (!std::isfinite(value)) throw DivergentIntegral("moment M(p) overflows double range");
  return value;
}

LambdaSup capital_lambda(const RadialCutoff& cutoff, int d, int n_cap) {
  if (n_cap < 1) throw std::invalid_argument("capital_lambda: n_cap must be >= 1");
  LambdaSup out;
  out.value = -std::numeric_limits<double>::infinity();
  std::vector<double> values;
  values.reserve(n_cap);
  for (int n = 1; n <= n_cap; ++n) {
    const double v = std::exp(log_moment(cutoff, n - 2.0, d) / n);
    values.push_back(v);
    if (v > out.value) {
      out.value = v;
      out.argmax = n;
    }
  }
  out.evaluated = n_cap;
  if (n_cap > 10) {
    out.decreasing_tail = true;
    for (int i = n_cap - 10; i < n_cap; ++i) {
      if (!(values[i] < values[i - 1])) out.decreasing_tail = false;
    }
  }
  return out;
}

double radial_integral(const RadialCutoff& cutoff, int d, const std::function<double(double)>& f,
                       double rel_tol) {
  auto g = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp((d - 1.0) * std::log(r) + cutoff.log_squared(r)) * f(r);
  };
  const double sigma = cutoff.scale();
  double value = 0.0;
  switch (cutoff.family()) {
    case CutoffFamily::Sharp: value = integrate(g, 0.0, sigma, rel_tol).value; break;
    case CutoffFamily::Gaussian:
      value = integrate(g, 0.0, sigma * (std::sqrt(0.5 * d) + 12.0), rel_tol).value;
      break;
    case CutoffFamily::PowerLaw: {
      const double head = integrate(g, 0.0, sigma, rel_tol).value;
      auto tail = [&](double u) { return sigma * g(sigma / u) / (u * u); };
      value = head + integrate(tail, 0.0, 1.0, rel_tol).value;
      break;
    }
  }
  return sphere_area(d) * value;
}

Eigen::VectorXd ModelParams::momentum_vector() const {
  if (momentum.size() == 0) return Eigen::VectorXd::Zero(dimension);
  return momentum;
}

ModelParams ModelParams::at_rest() const {
  ModelParams copy = *this;
  copy.momentum = Eigen::VectorXd::Zero(dimension);
  return copy;
}

void ModelParams::validate() const {
  if (dimension < 3) throw std::invalid_argument("dimension must be at least 3");
  if (momentum.size() != 0 && momentum.size() != dimension) {
    throw std::invalid_argument("total momentum must have `dimension` components");
  }
  if (!std::isfinite(coupling)) throw std::invalid_argument("coupling must be finite");
  if (kernel == KernelKind::Brownian && !(momentum_norm() < 1.0)) {
    throw std::invalid_argument("the translation-invariant series requires |P| < 1");
  }
}

}  // namespace nelson
