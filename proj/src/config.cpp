#include "nelson/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nelson {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Typed access to one section; remembers which keys were read so leftovers
// can be rejected.
class Section {
 public:
  Section(std::string name, const std::map<std::string, std::string>* values)
      : name_(std::move(name)), values_(values) {}

  bool has(const std::string& key) const { return values_ && values_->count(key); }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return values_->at(key);
  }

  double real(const std::string& key, double fallback) {
    auto v = text(key);
    return v ? parse_real(key, *v) : fallback;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    auto v = text(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || ptr != end) fail(key, "expected a nonnegative integer");
    return out;
  }

  int integer(const std::string& key, int fallback) {
    auto v = text(key);
    if (!v) return fallback;
    int out = 0;
    const auto* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || ptr != end) fail(key, "expected an integer");
    return out;
  }

  std::vector<double> reals(const std::string& key) {
    auto v = text(key);
    std::vector<double> out;
    if (!v) return out;
    for (const auto& item : split_list(*v)) out.push_back(parse_real(key, item));
    return out;
  }

  void reject_unused() const {
    if (!values_) return;
    for (const auto& [key, value] : *values_) {
      if (!used_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + why);
  }

 private:
  double parse_real(const std::string& key, const std::string& s) const {
    double out = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) fail(key, "expected a finite number");
    return out;
  }

  std::string name_;
  const std::map<std::string, std::string>* values_;
  std::set<std::string> used_;
};

const std::set<std::string> kSections{"model", "expansion", "bounds", "pathmc", "output", "verify"};

RadialCutoff read_cutoff(Section& model) {
  const std::string family = model.text("cutoff").value_or("sharp");
  const double amplitude = model.real("amplitude", 1.0);
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (model.has(k)) model.fail(k, "not a parameter of the " + family + " cutoff");
    }
  };
  try {
    if (family == "sharp") {
      forbid({"width", "exponent", "scale"});
      return RadialCutoff::sharp(model.real("radius", 1.0), amplitude);
    }
    if (family == "gaussian") {
      forbid({"radius", "exponent", "scale"});
      return RadialCutoff::gaussian(model.real("width", 1.0), amplitude);
    }
    if (family == "powerlaw") {
      forbid({"radius", "width"});
      if (!model.has("exponent")) model.fail("exponent", "required for the powerlaw cutoff");
      return RadialCutoff::power_law(model.real("exponent", 0.0), model.real("scale", 1.0), amplitude);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  model.fail("cutoff", "unknown family '" + family + "' (sharp | gaussian | powerlaw)");
}

}  // namespace

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    const auto cut = raw.find_first_of("#;");
    const std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + "empty section name");
      if (doc.count(section)) throw ConfigError(where + "section [" + section + "] repeated");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!doc[section].emplace(key, value).second) {
      throw ConfigError(where + "key '" + key + "' repeated in [" + section + "]");
    }
  }
  return doc;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<PathConfig> RunConfig::path_configs() const {
  std::vector<PathConfig> out;
  for (double T : pathmc.horizons) {
    PathConfig c;
    c.horizon = T;
    int m = static_cast<int>(std::ceil(T * pathmc.steps_per_unit - 1e-9));
    if (m % 2) ++m;
    c.steps = std::max(m, 8);
    c.samples = pathmc.samples;
    c.batch_size = pathmc.batch_size;
    c.seed = mc.seed;
    c.workers = mc.workers;
    out.push_back(c);
  }
  return out;
}

RunConfig load_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  for (const auto& [name, values] : doc) {
    if (!kSections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) {
    auto it = doc.find(name);
    return Section(name, it == doc.end() ? nullptr : &it->second);
  };

  RunConfig cfg;
  std::string canonical;
  for (const auto& [name, values] : doc) {
    canonical += "[" + name + "]\n";
    for (const auto& [k, v] : values) canonical += k + "=" + v + "\n";
  }
  cfg.hash = fnv1a_hex(canonical);

  {
    Section model = section("model");
    auto& m = cfg.model;
    m.dimension = model.integer("dimension", 3);
    const std::string kernel = model.text("kernel").value_or("brownian");
    if (kernel == "brownian") {
      m.kernel = KernelKind::Brownian;
    } else if (kernel == "oscillator") {
      m.kernel = KernelKind::Oscillator;
    } else {
      model.fail("kernel", "expected brownian or oscillator");
    }
    m.cutoff = read_cutoff(model);
    m.coupling = model.real("lambda", 0.0);
    const double p = model.real("momentum", 0.0);
    if (p < 0.0) model.fail("momentum", "magnitude must be >= 0");
    if (m.dimension < 3) model.fail("dimension", "must be at least 3");
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(m.dimension);
    dir[0] = 1.0;
    if (model.has("direction")) {
      const auto d = model.reals("direction");
      if (static_cast<int>(d.size()) != m.dimension) model.fail("direction", "needs `dimension` entries");
      dir = Eigen::Map<const Eigen::VectorXd>(d.data(), m.dimension);
      if (dir.norm() == 0.0) model.fail("direction", "must be nonzero");
      dir.normalize();
    } else {
      model.text("direction");
    }
    m.momentum = p * dir;
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[model] ") + e.what());
    }
    model.reject_unused();
  }
  {
    Section ex = section("expansion");
    cfg.max_order = ex.integer("max_order", 2);
    if (cfg.max_order < 0 || cfg.max_order > 12) ex.fail("max_order", "must be in 0..12");
    const std::string mode = ex.text("tree_mode").value_or("auto");
    if (mode == "auto") {
      cfg.mc.tree_mode = TreeMode::Auto;
    } else if (mode == "exhaustive") {
      cfg.mc.tree_mode = TreeMode::Exhaustive;
    } else if (mode == "sampled") {
      cfg.mc.tree_mode = TreeMode::Sampled;
    } else {
      ex.fail("tree_mode", "expected auto, exhaustive or sampled");
    }
    if (cfg.mc.tree_mode == TreeMode::Exhaustive && cfg.max_order > kMaxEnumeratedTreeSize) {
      ex.fail("tree_mode", "exhaustive summation is capped at order 9");
    }
    cfg.mc.samples = ex.count("samples", cfg.mc.samples);
    cfg.mc.batch_size = ex.count("batch_size", cfg.mc.batch_size);
    cfg.mc.seed = ex.count("seed", 0);
    try {
      cfg.mc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[expansion] ") + e.what());
    }
    ex.reject_unused();
  }
  {
    Section b = section("bounds");
    if (b.has("radii")) {
      cfg.bounds.lambda0_ho = cfg.bounds.lambda0_translation = false;
      for (const auto& r : split_list(*b.text("radii"))) {
        if (r == "ho") {
          cfg.bounds.lambda0_ho = true;
        } else if (r == "translation") {
          cfg.bounds.lambda0_translation = true;
        } else {
          b.fail("radii", "entries must be ho or translation");
        }
      }
    }
    cfg.bounds.tail_from = b.integer("tail_from", 3);
    if (cfg.bounds.tail_from < 1) b.fail("tail_from", "must be >= 1");
    b.reject_unused();
  }
  {
    Section p = section("pathmc");
    if (p.has("horizons")) cfg.pathmc.horizons = p.reals("horizons");
    if (cfg.pathmc.horizons.empty()) p.fail("horizons", "needs at least one value");
    for (std::size_t i = 0; i < cfg.pathmc.horizons.size(); ++i) {
      if (!(cfg.pathmc.horizons[i] > 0.0)) p.fail("horizons", "must be positive");
      if (i > 0 && !(cfg.pathmc.horizons[i] > cfg.pathmc.horizons[i - 1])) {
        p.fail("horizons", "must be increasing");
      }
    }
    cfg.pathmc.steps_per_unit = p.integer("steps_per_unit", cfg.pathmc.steps_per_unit);
    if (cfg.pathmc.steps_per_unit < 1) p.fail("steps_per_unit", "must be >= 1");
    cfg.pathmc.samples = p.count("samples", cfg.pathmc.samples);
    cfg.pathmc.batch_size = p.count("batch_size", cfg.pathmc.batch_size);
    for (const auto& pc : cfg.path_configs()) {
      try {
        pc.validate(cfg.model.cutoff);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[pathmc] ") + e.what());
      }
    }
    p.reject_unused();
  }
  {
    Section o = section("output");
    if (auto f = o.text("format")) {
      if (*f == "json") {
        cfg.format = OutputFormat::Json;
      } else if (*f == "csv") {
        cfg.format = OutputFormat::Csv;
      } else {
        o.fail("format", "expected json or csv");
      }
    }
    cfg.output_path = o.text("path").value_or("");
    o.reject_unused();
  }
  {
    Section v = section("verify");
    auto& opt = cfg.verify;
    opt.bkar_instances = v.integer("bkar_instances", opt.bkar_instances);
    opt.positivity_configs = v.integer("positivity_configs", opt.positivity_configs);
    opt.overlap_instances = v.count("overlap_instances", opt.overlap_instances);
    opt.lemma_samples = v.count("lemma_samples", opt.lemma_samples);
    opt.tree_lemma_samples = v.count("tree_lemma_samples", opt.tree_lemma_samples);
    opt.tree_lemma_trees = v.integer("tree_lemma_trees", opt.tree_lemma_trees);
    opt.exp_log_samples = v.count("exp_log_samples", opt.exp_log_samples);
    opt.sigma = v.real("sigma", opt.sigma);
    if (!(opt.sigma > 0.0)) v.fail("sigma", "must be positive");
    if (opt.bkar_instances < 1 || opt.positivity_configs < 1 || opt.tree_lemma_trees < 1 ||
        opt.lemma_samples < 2 || opt.tree_lemma_samples < 2 || opt.overlap_instances < 1 ||
        opt.exp_log_samples < 2048) {
      throw ConfigError("[verify] sample and instance counts are too small");
    }
    v.reject_unused();
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_config(buffer.str());
}

}  // namespace nelson
