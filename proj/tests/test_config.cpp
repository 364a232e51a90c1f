#include "doctest.h"

#include "nelson/config.hpp"
#include "nelson/json_writer.hpp"

#include <cmath>

using namespace nelson;

TEST_SUITE("config") {
  TEST_CASE("ini parsing") {
    const auto doc = parse_ini("# comment\n[a]\nx = 1 ; trailing\n\n[b]\ny=two words\n");
    CHECK(doc.at("a").at("x") == "1");
    CHECK(doc.at("b").at("y") == "two words");
    CHECK_THROWS_AS(parse_ini("x = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_ini("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_ini("[a]\njunk\n"), ConfigError);
    CHECK_THROWS_AS(parse_ini("[a\n"), ConfigError);
    CHECK_THROWS_AS(parse_ini("[a]\n[a]\n"), ConfigError);
  }

  TEST_CASE("defaults") {
    const RunConfig c = load_config("");
    CHECK(c.model.dimension == 3);
    CHECK(c.model.kernel == KernelKind::Brownian);
    CHECK(c.model.cutoff.family() == CutoffFamily::Sharp);
    CHECK(c.model.coupling == 0.0);
    CHECK(c.mc.seed == 0);
    CHECK(c.max_order == 2);
    CHECK_FALSE(c.format.has_value());
  }

  TEST_CASE("full model block") {
    const RunConfig c = load_config(
        "[model]\ndimension = 3\nkernel = brownian\ncutoff = gaussian\nwidth = 0.5\n"
        "amplitude = 2\nlambda = 0.01\nmomentum = 0.2\ndirection = 0, 3, 4\n"
        "[expansion]\nmax_order = 3\ntree_mode = sampled\nsamples = 4096\nbatch_size = 512\nseed = 9\n"
        "[bounds]\nradii = ho\ntail_from = 4\n"
        "[pathmc]\nhorizons = 2, 4\nsteps_per_unit = 9\n"
        "[output]\nformat = csv\npath = out.csv\n");
    CHECK(c.model.cutoff.family() == CutoffFamily::Gaussian);
    CHECK(c.model.cutoff.scale() == 0.5);
    CHECK(c.model.cutoff.amplitude() == 2.0);
    CHECK(c.model.momentum[1] == doctest::Approx(0.12));
    CHECK(c.model.momentum[2] == doctest::Approx(0.16));
    CHECK(c.mc.tree_mode == TreeMode::Sampled);
    CHECK(c.mc.seed == 9);
    CHECK(c.bounds.lambda0_ho);
    CHECK_FALSE(c.bounds.lambda0_translation);
    CHECK(c.bounds.tail_from == 4);
    CHECK(*c.format == OutputFormat::Csv);
    CHECK(c.output_path == "out.csv");
    const auto paths = c.path_configs();
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].steps == 18);
    CHECK(paths[1].steps == 36);
    CHECK(paths[0].seed == 9);
  }

  TEST_CASE("odd grid sizes round up to even") {
    const RunConfig c = load_config("[pathmc]\nhorizons = 4.5\nsteps_per_unit = 5\n");
    CHECK(c.path_configs()[0].steps == 24);
  }

  TEST_CASE("schema violations") {
    const char* bad[] = {
        "[model]\nunknown = 1\n",
        "[mystery]\n",
        "[model]\nlambda = abc\n",
        "[model]\nlambda = 1e999\n",
        "[model]\nkernel = quantum\n",
        "[model]\ncutoff = sharp\nwidth = 1\n",
        "[model]\ncutoff = powerlaw\n",
        "[model]\ncutoff = cubic\n",
        "[model]\nmomentum = 1.5\n",
        "[model]\nmomentum = -0.1\n",
        "[model]\ndirection = 1, 0\n",
        "[model]\ndimension = 2\n",
        "[expansion]\nsamples = 100\nbatch_size = 100\n",
        "[expansion]\ntree_mode = sometimes\n",
        "[expansion]\nmax_order = 12\ntree_mode = exhaustive\n",
        "[expansion]\nseed = -1\n",
        "[bounds]\nradii = ho, thm2\n",
        "[pathmc]\nhorizons = 8, 4\n",
        "[pathmc]\nsteps_per_unit = 1\n",
        "[output]\nformat = xml\n",
        "[verify]\nsigma = 0\n",
    };
    for (const char* text : bad) {
      CAPTURE(text);
      CHECK_THROWS_AS(load_config(text), ConfigError);
    }
  }

  TEST_CASE("config hash") {
    const auto a = load_config("[model]\nlambda = 0.05\n");
    const auto b = load_config("# same content\n[model]\n  lambda=0.05  \n");
    const auto c = load_config("[model]\nlambda = 0.06\n");
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);
    CHECK(a.hash.size() == 16);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("json numbers carry 17 significant digits") {
    Json j{{"x", 0.1}, {"inf", std::numeric_limits<double>::infinity()}, {"n", 3}, {"list", Json::array()}};
    const std::string text = dump_json(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("\"inf\": null") != std::string::npos);
    CHECK(text.find("\"n\": 3") != std::string::npos);
    CHECK(Json::parse(text)["x"].get<double>() == 0.1);
  }
}
