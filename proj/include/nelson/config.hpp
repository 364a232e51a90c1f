#pragma once

#include "nelson/expansion.hpp"
#include "nelson/model.hpp"
#include "nelson/pathmc.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nelson {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sections of `key = value` lines. '#' and ';' start comments.
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

/// Throws ConfigError on malformed lines, keys outside a section, or repeated
/// keys.
IniDocument parse_ini(const std::string& text);

struct BoundsOptions {
  bool lambda0_ho = true;
  bool lambda0_translation = true;
  int tail_from = 3;
};

struct PathOptions {
  std::vector<double> horizons{4.0, 8.0, 16.0};
  /// Grid points per unit time; m = steps_per_unit * T (rounded up to even).
  int steps_per_unit = 16;
  std::uint64_t samples = 4096;
  std::uint64_t batch_size = 256;
};

struct VerifyOptions {
  int bkar_instances = 20;
  int positivity_configs = 10000;
  std::uint64_t overlap_instances = 100000;
  std::uint64_t lemma_samples = 400000;
  std::uint64_t tree_lemma_samples = 200000;
  int tree_lemma_trees = 10;
  std::uint64_t exp_log_samples = 1 << 16;
  double sigma = 4.0;
};

enum class OutputFormat { Json, Csv };

struct RunConfig {
  ModelParams model;
  int max_order = 2;
  McConfig mc;
  BoundsOptions bounds;
  PathOptions pathmc;
  VerifyOptions verify;
  std::optional<OutputFormat> format;
  std::string output_path;
  /// FNV-1a 64 of the canonical section/key/value listing.
  std::string hash;

  std::vector<PathConfig> path_configs() const;
};

/// Parses and validates every section before anything runs. Unknown sections
/// or keys, malformed values and invalid parameter combinations raise
/// ConfigError.
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace nelson
