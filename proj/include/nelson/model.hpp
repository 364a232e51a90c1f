#pragma once

#include <Eigen/Dense>

#include <functional>

#include <limits>
#include <stdexcept>
#include <string>

namespace nelson {

/// Thrown when a radial moment or a quantity built from one is infinite.
class DivergentIntegral : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class CutoffFamily { Sharp, Gaussian, PowerLaw };

/// Covariance of the one-dimensional process that the particle follows once
/// the field is integrated out: Ornstein-Uhlenbeck for the oscillator model,
/// Brownian motion for the translation-invariant model.
enum class KernelKind { Oscillator, Brownian };

std::string to_string(CutoffFamily family);
std::string to_string(KernelKind kind);

/// Rotationally invariant, nonnegative form factor rho_hat(|k|).
///
///   sharp     A * 1[r <= K]
///   gaussian  A * exp(-r^2 / (2 sigma^2))
///   powerlaw  A * (1 + r / kappa)^(-alpha)
///
/// The family set is closed so that every moment integral has a certified
/// tail treatment.
class RadialCutoff {
 public:
  static RadialCutoff sharp(double radius, double amplitude = 1.0);
  static RadialCutoff gaussian(double width, double amplitude = 1.0);
  static RadialCutoff power_law(double exponent, double scale, double amplitude = 1.0);

  CutoffFamily family() const { return family_; }
  double amplitude() const { return amplitude_; }
  /// Cutoff radius K (sharp), width sigma (gaussian) or scale kappa (powerlaw).
  double scale() const { return scale_; }
  /// Decay exponent alpha; only meaningful for the powerlaw family.
  double exponent() const { return exponent_; }

  double operator()(double r) const;
  double squared(double r) const;
  /// log(rho_hat(r)^2); -inf outside the support.
  double log_squared(double r) const;
  /// Largest |k| with rho_hat > 0; +inf for unbounded families.
  double support_radius() const;
  /// A radius beyond which rho_hat^2 is below 1e-30 of its peak.
  double effective_radius() const;

  RadialCutoff scaled(double factor) const;

 private:
  RadialCutoff(CutoffFamily family, double scale, double exponent, double amplitude);

  CutoffFamily family_;
  double scale_;
  double exponent_;
  double amplitude_;
};

/// Surface area S_{d-1} = 2 pi^{d/2} / Gamma(d/2) of the unit sphere in R^d.
double sphere_area(int d);

/// M(p) = int d^dk rho_hat(k)^2 |k|^p, by radial quadrature with relative
/// error below 1e-10. Throws DivergentIntegral when p <= -d or the tail is not
/// integrable.
double moment(const RadialCutoff& cutoff, double p, int d);

/// log M(p); stays finite where M(p) itself would overflow.
double log_moment(const RadialCutoff& cutoff, double p, int d);

struct LambdaSup {
  double value = 0.0;
  int argmax = 0;
  int evaluated = 0;
  /// True when M(n-2)^{1/n} decreased strictly over the last ten evaluated n.
  /// This is evidence for the supremum, not a proof.
  bool decreasing_tail = false;
};

/// S_{d-1} int_0^inf r^{d-1} rho_hat(r)^2 f(r) dr for f of at most
/// polynomial growth.
double radial_integral(const RadialCutoff& cutoff, int d, const std::function<double(double)>& f,
                       double rel_tol = 1e-12);

/// sup_{1 <= n <= n_cap} M(n-2)^{1/n}.
LambdaSup capital_lambda(const RadialCutoff& cutoff, int d, int n_cap = 200);

struct ModelParams {
  int dimension = 3;
  double coupling = 0.0;
  /// Total momentum P; empty means zero.
  Eigen::VectorXd momentum;
  KernelKind kernel = KernelKind::Brownian;
  RadialCutoff cutoff = RadialCutoff::sharp(1.0);

  double g() const { return 0.25 * coupling * coupling; }
  double momentum_norm() const { return momentum.size() == 0 ? 0.0 : momentum.norm(); }
  /// P as a d-vector (zero-filled when unset).
  Eigen::VectorXd momentum_vector() const;
  ModelParams at_rest() const;
  /// Throws std::invalid_argument on d < 3, a wrong-sized P, or |P| >= 1 for
  /// the Brownian kernel.
  void validate() const;
};

}  // namespace nelson
