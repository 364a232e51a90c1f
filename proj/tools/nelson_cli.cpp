// Command-line driver: one config file in, one JSON or CSV document out.
#include "nelson/bounds.hpp"
#include "nelson/config.hpp"
#include "nelson/expansion.hpp"
#include "nelson/json_writer.hpp"
#include "nelson/pathmc.hpp"
#include "nelson/trees.hpp"
#include "nelson/verification.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace nelson;

namespace {

enum ExitCode { kOk = 0, kNumericFailure = 1, kConfigError = 2, kVerifyFailure = 3 };

std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json model_json(const ModelParams& m) {
  Json cutoff{{"family", to_string(m.cutoff.family())},
              {"scale", m.cutoff.scale()},
              {"amplitude", m.cutoff.amplitude()}};
  if (m.cutoff.family() == CutoffFamily::PowerLaw) cutoff["exponent"] = m.cutoff.exponent();
  Json momentum = Json::array();
  const Eigen::VectorXd p = m.momentum_vector();
  for (int i = 0; i < p.size(); ++i) momentum.push_back(p[i]);
  return Json{{"kernel", to_string(m.kernel)},
              {"dimension", m.dimension},
              {"cutoff", cutoff},
              {"lambda", m.coupling},
              {"momentum", momentum}};
}

Json provenance(const RunConfig& cfg) {
  return Json{{"seed", cfg.mc.seed}, {"version", NELSON_VERSION}, {"config_hash", cfg.hash}};
}

Json coefficient_json(const CoefficientEstimate& c) {
  return Json{{"order", c.order},     {"kind", to_string(c.kind)}, {"value", c.value},
              {"stderr", c.std_error}, {"samples", c.samples},     {"mode", to_string(c.mode)}};
}

Json coefficient_list(const std::vector<CoefficientEstimate>& cs) {
  Json list = Json::array();
  for (const auto& c : cs) list.push_back(coefficient_json(c));
  return list;
}

std::string coefficient_csv(const std::vector<CoefficientEstimate>& cs) {
  std::string out = "order,kind,value,stderr,samples,mode\n";
  for (const auto& c : cs) {
    out += std::to_string(c.order) + "," + to_string(c.kind) + "," + format_double(c.value) + "," +
           format_double(c.std_error) + "," + std::to_string(c.samples) + "," + to_string(c.mode) +
           "\n";
  }
  return out;
}

Json radii_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  Json radii = Json::object();
  if (cfg.bounds.lambda0_translation) {
    radii["lambda0_thm"] = lambda0_theorem(m.cutoff, m.dimension, m.momentum_norm());
    radii["lambda0_section"] = lambda0_translation(m.cutoff, m.dimension, m.momentum_norm());
  }
  if (cfg.bounds.lambda0_ho) radii["lambda0_ho"] = lambda0_ho(m.cutoff, m.dimension);
  return radii;
}

Json warnings_json(const std::vector<std::string>& warnings) {
  Json list = Json::array();
  for (const auto& w : warnings) list.push_back(w);
  return list;
}

Json tail_json(const TailBound& t) {
  Json terms = Json::array();
  for (double x : t.terms) terms.push_back(x);
  return Json{{"from_order", t.from_order},
              {"ratio", t.ratio},
              {"radius", t.radius},
              {"finite", std::isfinite(t.total)},
              {"total", t.total},
              {"terms", terms}};
}

OutputFormat format_for(const RunConfig& cfg, OutputFormat fallback, bool csv_allowed,
                        const std::string& command) {
  const OutputFormat f = cfg.format.value_or(fallback);
  if (f == OutputFormat::Csv && !csv_allowed) {
    throw ConfigError("[output] format = csv is not available for '" + command + "'");
  }
  return f;
}

std::string run_energy(const RunConfig& cfg) {
  format_for(cfg, OutputFormat::Json, false, "energy");
  const SeriesResult r = ground_state_energy(cfg.model, cfg.max_order, cfg.mc);
  Json doc;
  doc["command"] = "energy";
  doc["model"] = model_json(cfg.model);
  doc["max_order"] = cfg.max_order;
  doc["coefficients"] = coefficient_list(r.coefficients);
  doc["energy"] = Json{{"value", r.value},
                       {"stat_error", r.stat_error},
                       {"truncation_bound", r.truncation_bound}};
  doc["radii"] = radii_json(cfg);
  doc["radius_exceeded"] = r.radius_exceeded;
  doc["warnings"] = warnings_json(r.warnings);
  doc["provenance"] = provenance(cfg);
  return dump_json(doc);
}

std::string run_mass(const RunConfig& cfg) {
  format_for(cfg, OutputFormat::Json, false, "mass");
  const SeriesResult r = effective_mass(cfg.model, cfg.max_order, cfg.mc);
  Json doc;
  doc["command"] = "mass";
  doc["model"] = model_json(cfg.model);
  doc["max_order"] = cfg.max_order;
  doc["coefficients"] = coefficient_list(r.coefficients);
  doc["c2_closed_form"] = c2_closed_form(cfg.model.cutoff, cfg.model.dimension);
  doc["mass"] = Json{{"value", r.value},
                     {"stat_error", r.stat_error},
                     {"truncation_bound", r.truncation_bound},
                     {"inverse_mass", r.inverse_mass},
                     {"heavier_than_free", r.heavier_than_free}};
  doc["radii"] = radii_json(cfg);
  doc["radius_exceeded"] = r.radius_exceeded;
  doc["warnings"] = warnings_json(r.warnings);
  doc["provenance"] = provenance(cfg);
  return dump_json(doc);
}

std::string run_bounds(const RunConfig& cfg) {
  format_for(cfg, OutputFormat::Json, false, "bounds");
  const auto& m = cfg.model;
  const double lambda = m.coupling;
  Json doc;
  doc["command"] = "bounds";
  doc["model"] = model_json(m);
  doc["radii"] = radii_json(cfg);
  const LambdaSup sup = capital_lambda(m.cutoff, m.dimension);
  doc["capital_lambda"] = Json{{"value", sup.value},
                               {"argmax", sup.argmax},
                               {"evaluated", sup.evaluated},
                               {"decreasing_tail", sup.decreasing_tail}};
  Json tails = Json::object();
  double radius = 0.0;
  if (m.kernel == KernelKind::Brownian) {
    const auto t = gamma_tail_translation(lambda, m.momentum_norm(), m.cutoff, m.dimension,
                                          cfg.bounds.tail_from);
    tails["translation"] = tail_json(t);
    tails["inverse_mass"] = inverse_mass_tail(lambda, m.cutoff, m.dimension, cfg.bounds.tail_from);
    radius = t.radius;
  } else {
    const auto t = gamma_tail_oscillator(lambda, m.cutoff, m.dimension, cfg.bounds.tail_from);
    tails["oscillator"] = Json{{"exact", tail_json(t.exact)}, {"majorant", tail_json(t.majorant)}};
    radius = t.majorant.radius;
  }
  doc["tails"] = tails;
  doc["radius_exceeded"] = std::abs(lambda) >= radius;
  doc["provenance"] = provenance(cfg);
  return dump_json(doc);
}

std::string run_coeffs(const RunConfig& cfg) {
  const OutputFormat f = format_for(cfg, OutputFormat::Json, true, "coeffs");
  std::vector<CoefficientEstimate> energy, mass;
  for (int n = 1; n <= cfg.max_order; ++n) energy.push_back(energy_coefficient(n, cfg.model, cfg.mc));
  const bool brownian = cfg.model.kernel == KernelKind::Brownian;
  if (brownian) {
    for (int n = 1; n <= cfg.max_order; ++n) {
      mass.push_back(mass_coefficient(n, cfg.model.at_rest(), cfg.mc));
    }
  }
  if (f == OutputFormat::Csv) {
    auto all = energy;
    all.insert(all.end(), mass.begin(), mass.end());
    return coefficient_csv(all);
  }
  Json doc;
  doc["command"] = "coeffs";
  doc["model"] = model_json(cfg.model);
  doc["energy_coefficients"] = coefficient_list(energy);
  doc["first_order_quadrature"] = first_order_coefficient(cfg.model);
  if (brownian) {
    doc["mass_coefficients"] = coefficient_list(mass);
    doc["c2_closed_form"] = c2_closed_form(cfg.model.cutoff, cfg.model.dimension);
  }
  doc["provenance"] = provenance(cfg);
  return dump_json(doc);
}

std::string run_pathmc(const RunConfig& cfg) {
  const OutputFormat f = format_for(cfg, OutputFormat::Csv, true, "pathmc");
  const PathEnergy e = energy_from_paths(cfg.model, cfg.path_configs());
  if (f == OutputFormat::Csv) {
    std::string out = "T,logZ,logZ_stderr,energy,extrapolated\n";
    for (const auto& h : e.horizons) {
      out += format_double(h.horizon) + "," + format_double(h.log_z) + "," +
             format_double(h.log_z_std_error) + "," + format_double(h.corrected_energy) + "," +
             format_double(e.extrapolated) + "\n";
    }
    for (const auto& w : e.warnings) std::cerr << "warning: " << w << "\n";
    return out;
  }
  Json rows = Json::array();
  for (std::size_t i = 0; i < e.horizons.size(); ++i) {
    const auto& h = e.horizons[i];
    rows.push_back(Json{{"T", h.horizon},
                        {"logZ", h.log_z},
                        {"logZ_stderr", h.log_z_std_error},
                        {"raw_energy", h.energy},
                        {"energy", h.corrected_energy},
                        {"energy_stderr", h.energy_std_error},
                        {"discretization", h.discretization},
                        {"interpolation_error", h.interpolation_error},
                        {"residual", e.residuals[i]}});
  }
  Json doc;
  doc["command"] = "pathmc";
  doc["model"] = model_json(cfg.model);
  doc["horizons"] = rows;
  doc["extrapolated"] = Json{{"value", e.extrapolated},
                             {"stderr", e.extrapolated_std_error},
                             {"slope", e.slope},
                             {"systematic", e.systematic}};
  doc["warnings"] = warnings_json(e.warnings);
  doc["provenance"] = provenance(cfg);
  return dump_json(doc);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-expansion evaluation of polaron ground-state energy and effective mass"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  int workers = 1;
  app.add_option("-c,--config", config_path, "Plain-text key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the expansion seed");
  app.add_option("-o,--output", output, "Override the output path (default: stdout)");
  app.add_option("-j,--workers", workers, "Worker threads; never changes the output")
      ->check(CLI::Range(1, 256));

  for (const char* name : {"energy", "mass", "bounds", "verify", "pathmc", "coeffs"}) {
    app.add_subcommand(name);
  }
  app.get_subcommand("energy")->description("Ground-state energy series E(P)");
  app.get_subcommand("mass")->description("Effective mass from the inverse-mass series");
  app.get_subcommand("bounds")->description("Convergence radii and Gamma tail bounds");
  app.get_subcommand("verify")->description("Run the invariant and lemma checks");
  app.get_subcommand("pathmc")->description("Path-integral Monte Carlo energy per horizon");
  app.get_subcommand("coeffs")->description("Series coefficients only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config_file(config_path);
    if (seed) cfg.mc.seed = *seed;
    if (output) cfg.output_path = *output;
    cfg.mc.workers = workers;

    std::string text;
    int code = kOk;
    if (command == "energy") {
      text = run_energy(cfg);
    } else if (command == "mass") {
      text = run_mass(cfg);
    } else if (command == "bounds") {
      text = run_bounds(cfg);
    } else if (command == "coeffs") {
      text = run_coeffs(cfg);
    } else if (command == "pathmc") {
      text = run_pathmc(cfg);
    } else {
      format_for(cfg, OutputFormat::Json, false, "verify");
      const VerifyReport report = run_verify(cfg);
      Json doc = report.to_json();
      doc["provenance"] = provenance(cfg);
      text = dump_json(doc);
      if (!report.passed()) code = kVerifyFailure;
    }
    emit(text, cfg.output_path);
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CapExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    // NumericFailure, DivergentIntegral and other numeric guards
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  }
}
