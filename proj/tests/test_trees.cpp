#include "doctest.h"

#include "nelson/sampling.hpp"
#include "nelson/trees.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace nelson;

namespace {

std::uint64_t count(int n) {
  std::uint64_t c = 0;
  for (auto it = enumerate_trees(n).begin(); it != std::default_sentinel; ++it) ++c;
  return c;
}

// Brute force: (n-1)-edge subsets of K_n that are connected.
std::uint64_t brute_force_trees(int n) {
  std::vector<Edge> all;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) all.emplace_back(a, b);
  }
  std::uint64_t found = 0;
  std::vector<int> pick(n - 1);
  std::iota(pick.begin(), pick.end(), 0);
  const int m = static_cast<int>(all.size());
  while (true) {
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int x) {
      while (comp[x] != x) x = comp[x] = comp[comp[x]];
      return x;
    };
    bool acyclic = true;
    for (int i : pick) {
      const int ra = find(all[i].a), rb = find(all[i].b);
      if (ra == rb) {
        acyclic = false;
        break;
      }
      comp[ra] = rb;
    }
    if (acyclic) ++found;
    int k = n - 2;
    while (k >= 0 && pick[k] == m - (n - 1) + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < n - 1; ++j) pick[j] = pick[j - 1] + 1;
  }
  return found;
}

std::vector<Edge> sorted_edges(const Forest& f) {
  auto e = f.edges();
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST_SUITE("trees") {
  TEST_CASE("Cayley counts") {
    CHECK(count(1) == 1);
    CHECK(enumerate_trees(1).begin()->edges().empty());
    CHECK(count(4) == 16);
    CHECK(count(7) == 16807);
    CHECK(brute_force_trees(7) == 16807);
    for (int n = 2; n <= 8; ++n) CHECK(count(n) == cayley_count(n));
    CHECK_THROWS_AS(enumerate_trees(10), CapExceeded);
  }

  TEST_CASE("enumerated trees are distinct") {
    std::set<std::vector<Edge>> seen;
    for (const Tree& t : enumerate_trees(5)) seen.insert(sorted_edges(t));
    CHECK(seen.size() == 125);
  }

  TEST_CASE("Prufer round trip") {
    for (const Tree& t : enumerate_trees(6)) {
      const auto code = prufer_encode(t);
      CHECK(sorted_edges(prufer_decode(code, 6)) == sorted_edges(t));
    }
  }

  TEST_CASE("uniform tree sampling") {
    Rng rng = substream(3, {1});
    const Tree two = sample_tree_uniform(2, rng);
    REQUIRE(two.edges().size() == 1);
    CHECK(two.edges()[0] == Edge(0, 1));

    // the three codes of length one decode to the three labelled paths
    std::set<std::vector<Edge>> paths;
    for (int c = 0; c < 3; ++c) paths.insert(sorted_edges(prufer_decode(std::vector<int>{c}, 3)));
    CHECK(paths.size() == 3);

    const int draws = 100000;
    std::map<std::vector<Edge>, int> freq;
    for (int i = 0; i < draws; ++i) ++freq[sorted_edges(sample_tree_uniform(5, rng))];
    CHECK(freq.size() == 125);
    const double p = 1.0 / 125.0;
    const double band = 4.0 * std::sqrt(draws * p * (1 - p));
    for (const auto& [tree, f] : freq) CHECK(std::abs(f - draws * p) <= band);
  }

  TEST_CASE("forest counts") {
    auto forests = [](int n) {
      int c = 0;
      for (auto it = enumerate_forests(n).begin(); it != std::default_sentinel; ++it) ++c;
      return c;
    };
    CHECK(forests(2) == 2);
    CHECK(forests(3) == 7);
    CHECK(forests(4) == 38);
  }

  TEST_CASE("degrees") {
    CHECK(degrees(Tree(4, {{0, 1}, {0, 2}, {0, 3}})) == std::vector<int>{3, 1, 1, 1});
    CHECK(degrees(Tree(3, {{0, 1}, {1, 2}})) == std::vector<int>{1, 2, 1});
    CHECK(degrees(Tree(1, {})) == std::vector<int>{0});
  }

  TEST_CASE("trees with a given degree sequence") {
    CHECK(count_trees_with_degrees(std::vector<int>{1, 2, 1}) == 1);
    CHECK(count_trees_with_degrees(std::vector<int>{3, 1, 1, 1}) == 1);
    CHECK_THROWS_AS(count_trees_with_degrees(std::vector<int>{1, 1, 1}), std::invalid_argument);
    for (int n = 2; n <= 8; ++n) {
      std::uint64_t total = 0;
      for_each_degree_sequence(n, [&](std::span<const int> s) { total += count_trees_with_degrees(s); });
      CHECK(total == cayley_count(n));
    }
  }

  TEST_CASE("paths between vertices") {
    const Tree path(3, {{0, 1}, {1, 2}});
    CHECK(path_edges(path, 0, 2) == std::vector<Edge>{{0, 1}, {1, 2}});
    const Tree star(4, {{0, 1}, {0, 2}, {0, 3}});
    CHECK(path_edges(star, 1, 2) == std::vector<Edge>{{0, 1}, {0, 2}});
    CHECK(path_edges(Tree(2, {{0, 1}}), 0, 1) == std::vector<Edge>{{0, 1}});
    CHECK_THROWS_AS(path_edges(Forest(3, {{0, 1}}), 0, 2), std::invalid_argument);
  }

  TEST_CASE("malformed graphs are rejected") {
    CHECK_THROWS_AS(Forest(3, {{0, 1}, {1, 2}, {0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(Forest(2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Tree(3, {{0, 1}}), std::invalid_argument);
  }
}
