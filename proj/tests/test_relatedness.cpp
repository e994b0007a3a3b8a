#include <cmath>
#include <fstream>

#include "doctest.h"
#include "stratum/error.hpp"
#include "stratum/relatedness.hpp"
#include "support/oracle.hpp"

using namespace stratum;

TEST_CASE("star normalization is asymmetric") {
  const auto g = oracle::build(5, oracle::star(5));
  for (int j = 1; j <= 4; ++j) {
    CHECK(g.weight(0, j) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.weight(j, 0) == 1.0);
  }
  CHECK(g.weight(1, 2) == 0.0);
}

TEST_CASE("triangle weights are one half") {
  const auto g = oracle::build(3, oracle::clique(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(g.weight(i, j) == (i == j ? 0.0 : 0.5));
  }
}

TEST_CASE("isolated node has an empty row") {
  const auto g = oracle::build(6, oracle::path(5));
  CHECK(g.degree(5) == 0);
  CHECK(g.neighbors(5).empty());
}

TEST_CASE("rows match the dense reference and are sorted") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 12;
    const auto pairs = oracle::random_pairs(n, 0.25, seed);
    const auto g = oracle::build(n, pairs);
    const auto a = oracle::dense_relatedness(n, pairs);
    for (int i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (int j = 0; j < n; ++j) {
        CHECK(std::abs(g.weight(i, j) - a[i][j]) < 1e-15);
        // Support is symmetric even though weights are not.
        CHECK((g.weight(i, j) > 0) == (g.weight(j, i) > 0));
      }
    }
  }
}

TEST_CASE("connected components") {
  SUBCASE("two disjoint triangles") {
    oracle::Pairs p = oracle::clique(3);
    for (const auto& [a, b] : oracle::clique(3)) p.emplace_back(a + 3, b + 3);
    const auto c = connected_components(oracle::build(6, p));
    CHECK(c.component_size == std::vector<std::int64_t>{3, 3});
    CHECK(c.component_id[0] == 0);
    CHECK(c.component_id[5] == 1);
  }
  SUBCASE("bridge") {
    const auto c = connected_components(oracle::build(6, oracle::bridge()));
    CHECK(c.component_size == std::vector<std::int64_t>{6});
  }
  SUBCASE("isolated nodes") {
    const auto c = connected_components(oracle::build(4, {}));
    CHECK(c.component_size == std::vector<std::int64_t>{1, 1, 1, 1});
  }
}

TEST_CASE("graph cache round trip") {
  const auto dir = oracle::fresh_dir("graph_cache");
  const auto g = oracle::build(9, oracle::random_pairs(9, 0.4, 3));
  save_graph(dir / "g.bin", g);
  CHECK(load_graph(dir / "g.bin") == g);

  std::ofstream(dir / "bad.bin", std::ios::binary) << "NOPE";
  CHECK_THROWS_AS(load_graph(dir / "bad.bin"), Error);
}
