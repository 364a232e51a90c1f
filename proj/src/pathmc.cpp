#include "nelson/pathmc.hpp"

#include "nelson/expansion.hpp"
#include "nelson/parallel.hpp"
#include "nelson/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>

namespace nelson {

namespace {

constexpr double kExponentCap = 700.0;
constexpr double kTableStep = 0.02;
constexpr std::uint64_t kPathTag = 11;

void require_d3(int d) {
  if (d != 3) throw std::invalid_argument("path oracle supports d = 3 only");
}

// Radius beyond which rho_hat^2 is below 1e-6 of its value at 0.
double resolution_radius(const RadialCutoff& cutoff) {
  switch (cutoff.family()) {
    case CutoffFamily::Sharp: return cutoff.scale();
    case CutoffFamily::Gaussian: return cutoff.scale() * std::sqrt(6.0 * std::log(10.0));
    case CutoffFamily::PowerLaw:
      return cutoff.scale() * (std::pow(10.0, 3.0 / cutoff.exponent()) - 1.0);
  }
  return cutoff.scale();
}

// pi int_0^inf r rho_hat^2 f(r) dr over the cutoff's effective range.
template <class F>
double radial_pi(const RadialCutoff& cutoff, F&& f) {
  auto g = [&](double r) { return r * cutoff.squared(r) * f(r); };
  double upper;
  switch (cutoff.family()) {
    case CutoffFamily::Sharp: upper = cutoff.scale(); break;
    case CutoffFamily::Gaussian: upper = 12.0 * cutoff.scale(); break;
    default: return std::numbers::pi * integrate_half_line(g, 1e-10, 1e-15).value;
  }
  return std::numbers::pi * integrate(g, 0.0, upper, 1e-10, 1e-15).value;
}

double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
double sinhc(double x) { return std::abs(x) < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x; }

// W rows at time lags j * dt, tabulated in q and read back with four-point
// Lagrange interpolation (W is even in q, so points left of 0 are mirrored).
class WTable {
 public:
  WTable(const RadialCutoff& cutoff, double dt, int lags, double q_max)
      : cutoff_(cutoff), dt_(dt), nq_(static_cast<int>(std::ceil(q_max / kTableStep)) + 3) {
    rows_.resize(lags + 1);
    for (int j = 0; j <= lags; ++j) {
      rows_[j].resize(nq_);
      for (int i = 0; i < nq_; ++i) rows_[j][i] = w_potential(i * kTableStep, j * dt, cutoff);
    }
    limit_ = (nq_ - 3) * kTableStep;
    // Error budget from midpoints of a few rows, doubled.
    for (int j : {0, lags / 8, lags / 2, lags}) {
      for (int i = 0; i + 1 < nq_ - 3; i += 7) {
        const double q = (i + 0.5) * kTableStep;
        error_ = std::max(error_, std::abs(lookup(j, q) - w_potential(q, j * dt, cutoff)));
      }
    }
    error_ *= 2.0;
  }

  double lookup(int lag, double q) const {
    if (q >= limit_) return w_potential(q, lag * dt_, cutoff_);
    const double u = q / kTableStep;
    const int i = static_cast<int>(u);
    const double x = u - i;
    const auto& row = rows_[lag];
    const double wm = row[i == 0 ? 1 : i - 1];
    const double w0 = row[i], w1 = row[i + 1], w2 = row[i + 2];
    return -x * (x - 1) * (x - 2) / 6.0 * wm + (x + 1) * (x - 1) * (x - 2) / 2.0 * w0 -
           (x + 1) * x * (x - 2) / 2.0 * w1 + (x + 1) * x * (x - 1) / 6.0 * w2;
  }

  double error() const { return error_; }

 private:
  RadialCutoff cutoff_;
  double dt_;
  int nq_;
  double limit_ = 0.0;
  double error_ = 0.0;
  std::vector<std::vector<double>> rows_;
};

// One path written into `x` as 3 x (m+1), column-major.
void draw_path(KernelKind kind, double dt, int steps, Rng& rng, std::vector<double>& x) {
  std::normal_distribution<double> normal;
  x.resize(3 * (steps + 1));
  if (kind == KernelKind::Oscillator) {
    const double decay = std::exp(-dt);
    const double spread = std::sqrt(-0.5 * std::expm1(-2.0 * dt));
    for (int c = 0; c < 3; ++c) x[c] = std::sqrt(0.5) * normal(rng);
    for (int a = 1; a <= steps; ++a) {
      for (int c = 0; c < 3; ++c) x[3 * a + c] = decay * x[3 * (a - 1) + c] + spread * normal(rng);
    }
  } else {
    const double spread = std::sqrt(dt);
    for (int c = 0; c < 3; ++c) x[c] = 0.0;
    for (int a = 1; a <= steps; ++a) {
      for (int c = 0; c < 3; ++c) x[3 * a + c] = x[3 * (a - 1) + c] + spread * normal(rng);
    }
  }
}

double trapezoid_weight(int a, int steps) { return a == 0 || a == steps ? 0.5 : 1.0; }

struct PathSums {
  double full = 0.0;
  double half = 0.0;
  double imaginary = 0.0;
};

}  // namespace

void PathConfig::validate(const RadialCutoff& cutoff) const {
  if (!(horizon > 0.0)) throw std::invalid_argument("path horizon must be positive");
  if (steps < 8 || steps % 2 != 0) throw std::invalid_argument("path grid needs an even m >= 8");
  if (batch_size == 0 || samples / batch_size < 2) {
    throw std::invalid_argument("path sampling needs at least two batches");
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (horizon / steps > 1.0 / (4.0 * resolution_radius(cutoff))) {
    throw std::invalid_argument("grid step T/m does not resolve the cutoff (need T/m <= 1/(4 k_max))");
  }
}

double w_potential(double q, double t, const RadialCutoff& cutoff, int d) {
  require_d3(d);
  if (q < 0.0) throw std::invalid_argument("w_potential: q must be >= 0");
  const double at = std::abs(t);
  return radial_pi(cutoff, [&](double r) { return std::exp(-r * at) * sinc(r * q); });
}

PathEnsemble sample_paths(KernelKind kind, const PathConfig& cfg, Rng& rng, int d) {
  require_d3(d);
  PathEnsemble out;
  out.kind = kind;
  out.horizon = cfg.horizon;
  out.steps = cfg.steps;
  const double dt = cfg.horizon / cfg.steps;
  std::vector<double> buffer;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    draw_path(kind, dt, cfg.steps, rng, buffer);
    out.paths.emplace_back(Eigen::Map<const Eigen::MatrixXd>(buffer.data(), 3, cfg.steps + 1));
  }
  return out;
}

double mean_potential(const ModelParams& params, double tau) {
  require_d3(params.dimension);
  const double at = std::abs(tau);
  if (params.kernel == KernelKind::Oscillator) {
    const double var = -std::expm1(-at);
    return radial_pi(params.cutoff,
                     [&](double r) { return std::exp(-r * at - 0.5 * r * r * var); });
  }
  const double p = params.momentum_norm();
  return radial_pi(params.cutoff, [&](double r) {
    return std::exp(-r * at - 0.5 * r * r * at) * sinhc(r * p * at);
  });
}

ZEstimate z_estimate(const ModelParams& params, const PathConfig& cfg) {
  params.validate();
  require_d3(params.dimension);
  cfg.validate(params.cutoff);
  const double lambda2 = params.coupling * params.coupling;
  const double T = cfg.horizon;
  const int m = cfg.steps;
  const double dt = T / m;
  const bool brownian = params.kernel == KernelKind::Brownian;
  const Eigen::VectorXd p = params.momentum_vector();
  if (lambda2 * T * T * w_potential(0.0, 0.0, params.cutoff) > kExponentCap) {
    throw NumericFailure("lambda^2 T^2 W(0,0) exceeds the exponent cap");
  }

  ZEstimate out;
  if (lambda2 == 0.0) {
    // Free particle: Z_T = E[cos(P.b_T)] = exp(-T P^2 / 2) exactly.
    out.log_value = brownian ? -0.5 * p.squaredNorm() * T : 0.0;
    out.value = std::exp(out.log_value);
    out.samples = 0;
    return out;
  }
  std::unique_ptr<WTable> table;
  if (lambda2 > 0.0) {
    const double q_max = brownian ? 6.0 * std::sqrt(T) + 4.0 : 10.0;
    table = std::make_unique<WTable>(params.cutoff, dt, m, q_max);
    out.interpolation_error = lambda2 * T * T * table->error();
  }

  const std::uint64_t batches = cfg.samples / cfg.batch_size;
  const std::uint64_t horizon_bits = std::bit_cast<std::uint64_t>(T);
  auto sums = parallel_map<PathSums>(batches, cfg.workers, [&](std::size_t batch) {
    Rng rng = substream(cfg.seed, {kPathTag, horizon_bits, static_cast<std::uint64_t>(m), batch});
    std::vector<double> x;
    PathSums acc;
    for (std::uint64_t i = 0; i < cfg.batch_size; ++i) {
      draw_path(params.kernel, dt, m, rng, x);
      double full = 0.0, half = 0.0;
      if (table) {
        const double w00 = table->lookup(0, 0.0);
        for (int a = 0; a <= m; ++a) {
          const double ca = trapezoid_weight(a, m);
          full += ca * ca * w00;
          if (a % 2 == 0) half += 4.0 * ca * ca * w00;
          for (int b = a + 1; b <= m; ++b) {
            const double dx = x[3 * a] - x[3 * b], dy = x[3 * a + 1] - x[3 * b + 1],
                         dz = x[3 * a + 2] - x[3 * b + 2];
            const double w = table->lookup(b - a, std::sqrt(dx * dx + dy * dy + dz * dz));
            const double cb = trapezoid_weight(b, m);
            full += 2.0 * ca * cb * w;
            if (a % 2 == 0 && b % 2 == 0) half += 8.0 * ca * cb * w;
          }
        }
        full *= lambda2 * dt * dt;
        half *= lambda2 * dt * dt;
      }
      double c = 1.0, s = 0.0;
      if (brownian && p.size() > 0) {
        const double phase = p[0] * x[3 * m] + p[1] * x[3 * m + 1] + p[2] * x[3 * m + 2];
        c = std::cos(phase);
        s = std::sin(phase);
      }
      acc.full += std::exp(full) * c;
      acc.half += std::exp(half) * c;
      acc.imaginary += std::exp(full) * s;
    }
    const double inv = 1.0 / static_cast<double>(cfg.batch_size);
    return PathSums{acc.full * inv, acc.half * inv, acc.imaginary * inv};
  });

  auto stats = [&](auto member) {
    double mean = 0.0;
    for (const auto& s : sums) mean += s.*member;
    mean /= static_cast<double>(batches);
    double ss = 0.0;
    for (const auto& s : sums) ss += (s.*member - mean) * (s.*member - mean);
    return std::pair{mean, std::sqrt(ss / (batches - 1.0) / batches)};
  };
  const auto [z, z_err] = stats(&PathSums::full);
  const auto [z_half, z_half_err] = stats(&PathSums::half);
  const auto [im, im_err] = stats(&PathSums::imaginary);
  (void)z_half_err;
  if (!(z > 0.0) || !(z_half > 0.0)) throw NumericFailure("Z_T estimate is not positive");
  out.value = z;
  out.std_error = z_err;
  out.log_value = std::log(z);
  out.log_std_error = z_err / z;
  out.imaginary = im;
  out.imaginary_std_error = im_err;
  out.discretization = std::log(z_half) - out.log_value;
  out.samples = batches * cfg.batch_size;

  if (lambda2 > 0.0) {
    // sum_ab c_a c_b phi(|a-b| dt) by lag.
    double k1 = 0.0;
    for (int j = 0; j <= m; ++j) {
      double pair_weight = 0.0;
      for (int a = 0; a + j <= m; ++a) pair_weight += trapezoid_weight(a, m) * trapezoid_weight(a + j, m);
      k1 += (j == 0 ? 1.0 : 2.0) * pair_weight * mean_potential(params, j * dt);
    }
    out.first_cumulant = lambda2 * dt * dt * k1;
  }
  return out;
}

PathEnergy energy_from_paths(const ModelParams& params, const std::vector<PathConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("energy_from_paths needs at least one horizon");
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (!(configs[i].horizon > configs[i - 1].horizon)) {
      throw std::invalid_argument("horizons must be increasing");
    }
  }
  const double lambda2 = params.coupling * params.coupling;
  double k1_rate = 0.0;
  if (lambda2 > 0.0) {
    k1_rate = 2.0 * lambda2 *
              integrate_half_line([&](double tau) { return mean_potential(params, tau); }, 1e-10)
                  .value;
  }

  PathEnergy out;
  for (const auto& cfg : configs) {
    const ZEstimate z = z_estimate(params, cfg);
    HorizonEstimate h;
    h.horizon = cfg.horizon;
    h.log_z = z.log_value;
    h.log_z_std_error = z.log_std_error;
    h.energy = -z.log_value / cfg.horizon;
    h.energy_std_error = z.log_std_error / cfg.horizon;
    h.corrected_energy = -(z.log_value - z.first_cumulant) / cfg.horizon - k1_rate;
    h.discretization = z.discretization;
    h.interpolation_error = z.interpolation_error;
    out.horizons.push_back(h);
    out.systematic =
        std::max(out.systematic, (std::abs(z.discretization) + z.interpolation_error) / cfg.horizon);
    if (z.std_error / z.value >= 0.2) {
      out.warnings.push_back("stderr/Z >= 0.2 at T = " + std::to_string(cfg.horizon) +
                             "; log Z unreliable");
    }
  }

  // Weighted least squares for corrected_energy = E + b / T.
  const int k = static_cast<int>(out.horizons.size());
  if (k == 1) {
    out.extrapolated = out.horizons[0].corrected_energy;
    out.extrapolated_std_error = out.horizons[0].energy_std_error;
    out.residuals = {0.0};
    return out;
  }
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (const auto& h : out.horizons) {
    // Floor the weight so an exactly known value (lambda = 0) stays finite.
    const double sigma = std::max(h.energy_std_error, 1e-300);
    const double w = 1.0 / (sigma * sigma);
    const Eigen::Vector2d row(1.0, 1.0 / h.horizon);
    normal += w * row * row.transpose();
    rhs += w * row * h.corrected_energy;
  }
  const bool exact = std::all_of(out.horizons.begin(), out.horizons.end(),
                                 [](const HorizonEstimate& h) { return h.energy_std_error == 0.0; });
  Eigen::Vector2d coef;
  Eigen::Matrix2d cov;
  if (exact) {
    Eigen::Matrix2d plain = Eigen::Matrix2d::Zero();
    Eigen::Vector2d plain_rhs = Eigen::Vector2d::Zero();
    for (const auto& h : out.horizons) {
      const Eigen::Vector2d row(1.0, 1.0 / h.horizon);
      plain += row * row.transpose();
      plain_rhs += row * h.corrected_energy;
    }
    coef = plain.ldlt().solve(plain_rhs);
    cov.setZero();
  } else {
    cov = normal.inverse();
    coef = cov * rhs;
  }
  out.extrapolated = coef[0];
  out.slope = coef[1];
  out.extrapolated_std_error = std::sqrt(std::max(cov(0, 0), 0.0));
  for (const auto& h : out.horizons) {
    const double fit = coef[0] + coef[1] / h.horizon;
    out.residuals.push_back(h.energy_std_error > 0.0 ? (h.corrected_energy - fit) / h.energy_std_error
                                                     : 0.0);
  }
  return out;
}

}  // namespace nelson
