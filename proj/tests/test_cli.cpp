#include "doctest.h"

#include "nelson/json_writer.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nelson::Json;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "nelson_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI; returns the exit code and leaves stdout in `out`.
int run(const std::string& args, const fs::path& out) {
  const std::string cmd =
      std::string(NELSON_CLI) + " " + args + " > " + out.string() + " 2> " + out.string() + ".err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("energy at zero coupling is the free energy") {
    const auto cfg = write_config("free.ini", "[model]\nlambda = 0\nmomentum = 0.4\n");
    const auto out = scratch() / "free.json";
    REQUIRE(run("energy -c " + cfg.string(), out) == 0);
    const Json j = Json::parse(slurp(out));
    CHECK(j["energy"]["value"].get<double>() == 0.5 * 0.4 * 0.4);
    CHECK(j["coefficients"].empty());
    CHECK(j["provenance"]["seed"] == 0);
    CHECK(j["provenance"]["config_hash"].get<std::string>().size() == 16);
  }

  TEST_CASE("energy first-order term") {
    const auto cfg = write_config(
        "weak.ini", "[model]\nlambda = 0.05\n[expansion]\nmax_order = 2\nsamples = 32768\n");
    const auto out = scratch() / "weak.json";
    REQUIRE(run("energy -c " + cfg.string(), out) == 0);
    const Json j = Json::parse(slurp(out));
    const auto& c1 = j["coefficients"][0];
    CHECK(c1["order"] == 1);
    const double term = -0.05 * 0.05 / 4 * c1["value"].get<double>();
    const double err = 0.05 * 0.05 / 4 * c1["stderr"].get<double>();
    CHECK(std::abs(term - (-5.0953 * 0.0025)) <= 3 * err + 1e-7);
    CHECK(j["radii"]["lambda0_thm"].get<double>() == doctest::Approx(0.141047).epsilon(1e-5));
    CHECK(j["radii"].contains("lambda0_section"));
    CHECK_FALSE(j["radius_exceeded"].get<bool>());
  }

  TEST_CASE("radius warning keeps exit code zero") {
    const auto cfg = write_config("strong.ini", "[model]\nlambda = 0.3\n[expansion]\nmax_order = 1\n");
    const auto out = scratch() / "strong.json";
    REQUIRE(run("energy -c " + cfg.string(), out) == 0);
    const Json j = Json::parse(slurp(out));
    CHECK(j["radius_exceeded"].get<bool>());
    CHECK(j["energy"]["truncation_bound"].is_null());
  }

  TEST_CASE("mass") {
    const auto free = write_config("mass0.ini", "[model]\nlambda = 0\n");
    const auto out = scratch() / "mass.json";
    REQUIRE(run("mass -c " + free.string(), out) == 0);
    CHECK(Json::parse(slurp(out))["mass"]["value"].get<double>() == 1.0);

    const auto cfg = write_config(
        "mass.ini", "[model]\nlambda = 0.05\n[expansion]\nmax_order = 1\nsamples = 65536\n");
    REQUIRE(run("mass -c " + cfg.string(), out) == 0);
    const Json j = Json::parse(slurp(out));
    const double m = j["mass"]["value"].get<double>();
    CHECK(std::abs(m - 1.00585) <= 3 * j["mass"]["stat_error"].get<double>() + 1e-5);
    CHECK(j["mass"]["heavier_than_free"].get<bool>());
    CHECK(j["c2_closed_form"].get<double>() == doctest::Approx(-2.32711).epsilon(1e-5));
  }

  TEST_CASE("pathmc csv") {
    const auto cfg = write_config(
        "paths.ini", "[model]\nlambda = 0\nmomentum = 0.3\n[pathmc]\nhorizons = 2, 4\n");
    const auto out = scratch() / "paths.csv";
    REQUIRE(run("pathmc -c " + cfg.string(), out) == 0);
    std::istringstream lines(slurp(out));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "T,logZ,logZ_stderr,energy,extrapolated");
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 5);
      CHECK(v[3] == doctest::Approx(0.045).epsilon(1e-14));
    }
    CHECK(rows == 2);
    const auto again = scratch() / "paths2.csv";
    REQUIRE(run("pathmc -c " + cfg.string(), again) == 0);
    CHECK(slurp(out) == slurp(again));
  }

  TEST_CASE("outputs are identical across worker counts") {
    const auto cfg = write_config(
        "det.ini",
        "[model]\nlambda = 0.05\nmomentum = 0.1\n[expansion]\nmax_order = 3\nsamples = 4096\n"
        "batch_size = 256\nseed = 5\n");
    const auto osc = write_config(
        "det_osc.ini",
        "[model]\nkernel = oscillator\nlambda = 0.05\n[pathmc]\nhorizons = 2, 4\nsamples = 1024\n"
        "batch_size = 128\n[expansion]\nseed = 5\n");
    for (const std::string cmd : {"energy", "coeffs", "mass", "bounds"}) {
      const std::string a = (scratch() / ("w1_" + cmd)).string();
      const std::string b = (scratch() / ("w3_" + cmd)).string();
      REQUIRE(run(cmd + " -c " + cfg.string() + " --workers 1", a) == 0);
      REQUIRE(run(cmd + " -c " + cfg.string() + " --workers 3", b) == 0);
      CHECK(slurp(a) == slurp(b));
    }
    const auto a = scratch() / "w1_paths";
    const auto b = scratch() / "w3_paths";
    REQUIRE(run("pathmc -c " + osc.string() + " -j 1", a) == 0);
    REQUIRE(run("pathmc -c " + osc.string() + " -j 3", b) == 0);
    CHECK(slurp(a) == slurp(b));
  }

  TEST_CASE("seed and output overrides") {
    const auto cfg = write_config("seed.ini", "[model]\nlambda = 0.05\n[expansion]\nmax_order = 1\n");
    const auto target = scratch() / "override.json";
    fs::remove(target);
    const auto sink = scratch() / "stdout.txt";
    REQUIRE(run("energy -c " + cfg.string() + " --seed 17 --output " + target.string(), sink) == 0);
    CHECK(slurp(sink).empty());
    const Json j = Json::parse(slurp(target));
    CHECK(j["provenance"]["seed"] == 17);
  }

  TEST_CASE("exit codes") {
    const auto out = scratch() / "err.txt";
    CHECK(run("energy -c " + write_config("bad.ini", "[model]\nfoo = 1\n").string(), out) == 2);
    CHECK(run("energy -c " + write_config("csv.ini", "[output]\nformat = csv\n").string(), out) == 2);
    CHECK(run("energy -c /nonexistent/file.ini", out) == 2);
    CHECK(run("frobnicate -c " + write_config("ok.ini", "").string(), out) == 2);
    // 1/m_eff truncated at order one turns negative
    const auto neg = write_config("neg.ini", "[model]\nlambda = 0.9\n[expansion]\nmax_order = 1\n");
    CHECK(run("mass -c " + neg.string(), out) == 1);
    const auto overflow = write_config(
        "overflow.ini", "[model]\nkernel = oscillator\nlambda = 50\n[pathmc]\nhorizons = 16\n");
    CHECK(run("pathmc -c " + overflow.string(), out) == 1);
  }

  TEST_CASE("verify subcommand") {
    const auto cfg = write_config(
        "verify.ini",
        "[verify]\nbkar_instances = 3\npositivity_configs = 1000\noverlap_instances = 5000\n"
        "lemma_samples = 20000\ntree_lemma_samples = 20000\ntree_lemma_trees = 3\n"
        "exp_log_samples = 8192\n");
    const auto out = scratch() / "verify.json";
    REQUIRE(run("verify -c " + cfg.string(), out) == 0);
    const Json j = Json::parse(slurp(out));
    CHECK(j["passed"].get<bool>());
    CHECK(j["checks"].size() >= 10);
  }
}
