#include "doctest.h"
#include "stratum/error.hpp"
#include "stratum/hierarchy.hpp"
#include "stratum/synthetic.hpp"
#include "support/oracle.hpp"

using namespace stratum;

namespace {

std::vector<ClusterId> ids(std::initializer_list<int> values) {
  return {values.begin(), values.end()};
}

HierarchyParams params(std::vector<double> r, std::vector<std::int64_t> n_min,
                       std::vector<int> runs) {
  HierarchyParams p;
  p.resolution = std::move(r);
  p.min_size = std::move(n_min);
  p.runs = std::move(runs);
  p.base_seed = 1;
  return p;
}

std::string error_code(const HierarchyParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

oracle::Pairs two_cliques(int size) {
  oracle::Pairs p = oracle::clique(size);
  for (const auto& [a, b] : oracle::clique(size)) p.emplace_back(a + size, b + size);
  p.emplace_back(0, size);
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK(error_code(params({1e-5, 1e-4}, {10, 5}, {3, 3})) == "ok");
  CHECK(error_code(params({1e-4, 1e-4}, {10, 5}, {3, 3})) == "resolution_order");
  CHECK(error_code(params({1e-3, 1e-4}, {10, 5}, {3, 3})) == "resolution_order");
  CHECK(error_code(params({0.5, 1.5}, {10, 5}, {3, 3})) == "resolution_order");
  CHECK(error_code(params({1e-5, 1e-4}, {10}, {3, 3})) == "invalid_levels");
  CHECK(error_code(params({}, {}, {})) == "invalid_levels");
  CHECK(error_code(params({1e-5}, {0}, {3})) == "invalid_min_size");
  CHECK(error_code(params({1e-5}, {1}, {0})) == "invalid_runs");
}

TEST_CASE("area relatedness averages ordered pairs") {
  SUBCASE("hand example") {
    const auto g = oracle::build(4, {{0, 2}, {0, 3}, {1, 3}});
    const auto m = area_relatedness(g, ids({0, 0, 1, 2}));
    CHECK(m.at(0, 1) == doctest::Approx(0.25));
    CHECK(m.at(1, 2) == 0.0);
    CHECK_FALSE(m.values.contains({1, 2}));
  }
  SUBCASE("star keeps asymmetry") {
    const auto g = oracle::build(5, oracle::star(5));
    const auto m = area_relatedness(g, ids({0, 1, 1, 1, 1}));
    CHECK(m.at(0, 1) == doctest::Approx(0.25));
    CHECK(m.at(1, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("eligible areas") {
  const auto prelim = ids({0, 0, 0, 1, 1, 1, 1, 1, 2, 2});
  CHECK(eligible_set(prelim, 3) == ids({0, 1}));
  CHECK(eligible_set(prelim, 1) == ids({0, 1, 2}));
  CHECK(eligible_set(prelim, 6).empty());
  CHECK(area_sizes(prelim) == std::vector<std::int64_t>{3, 5, 2});
}

TEST_CASE("small areas are reassigned or excluded") {
  SUBCASE("all eligible") {
    const auto g = oracle::build(6, oracle::bridge());
    const auto re = reassign_small_areas(g, ids({0, 0, 0, 1, 1, 1}), 3);
    CHECK(re.final_area == ids({0, 0, 0, 1, 1, 1}));
    CHECK(re.excluded.empty());
  }
  SUBCASE("small area joins its related neighbour") {
    oracle::Pairs p = oracle::path(5);
    p.emplace_back(5, 6);
    p.emplace_back(5, 0);
    const auto g = oracle::build(7, p);
    const auto re = reassign_small_areas(g, ids({0, 0, 0, 0, 0, 1, 1}), 3);
    CHECK(re.final_area == ids({0, 0, 0, 0, 0, 0, 0}));
    CHECK(re.excluded.empty());
  }
  SUBCASE("small area without relations to eligible areas") {
    oracle::Pairs p = oracle::path(5);
    p.emplace_back(5, 6);
    const auto g = oracle::build(7, p);
    const auto re = reassign_small_areas(g, ids({0, 0, 0, 0, 0, 1, 1}), 3);
    CHECK(re.final_area == ids({0, 0, 0, 0, 0, kUnassigned, kUnassigned}));
    CHECK(re.excluded == std::vector<NodeId>{5, 6});
  }
  SUBCASE("ties go to the lowest eligible id") {
    // Node 6 relates equally to areas 0 and 1.
    oracle::Pairs p = oracle::clique(3);
    for (const auto& [a, b] : oracle::clique(3)) p.emplace_back(a + 3, b + 3);
    p.emplace_back(6, 0);
    p.emplace_back(6, 3);
    const auto g = oracle::build(7, p);
    const auto re = reassign_small_areas(g, ids({0, 0, 0, 1, 1, 1, 2}), 2);
    CHECK(re.final_area[6] == 0);
  }
}

TEST_CASE("edgeless graph excludes everything") {
  const auto g = oracle::build(10, {});
  const auto h = build_hierarchy(g, params({1e-4, 1e-3}, {3, 2}, {2, 2}));
  CHECK(h.excluded.size() == 10);
  for (const auto& level : h.levels) CHECK(level.area_count() == 0);
  for (const auto reason : h.exclusion) CHECK(reason == ExclusionReason::NoRelations);
}

TEST_CASE("two cliques split at the fine level and merge at the broad one") {
  const auto g = oracle::build(120, two_cliques(60));
  const auto p = params({1e-6, 0.01}, {50, 10}, {10, 10});
  const auto h = build_hierarchy(g, p);
  CHECK(h.level(2).area_sizes == std::vector<std::int64_t>{60, 60});
  CHECK(h.level(1).area_sizes == std::vector<std::int64_t>{120});
  CHECK(h.level(2).area_path == std::vector<std::string>{"1.1", "1.2"});
  CHECK(h.excluded.empty());
  CHECK(oracle::hierarchy_violations(h, g, p).empty());
}

TEST_CASE("exclusion reasons") {
  // A 30-node clique, a 3-node path and an isolated node.
  oracle::Pairs pairs = oracle::clique(30);
  pairs.emplace_back(30, 31);
  pairs.emplace_back(31, 32);
  const auto g = oracle::build(34, pairs);
  const auto p = params({1e-4, 1e-2}, {10, 5}, {5, 5});
  const auto h = build_hierarchy(g, p);
  CHECK(h.included_count() == 30);
  CHECK(h.exclusion[30] == ExclusionReason::SmallComponent);
  CHECK(h.exclusion[33] == ExclusionReason::NoRelations);
  CHECK(std::string(to_string(ExclusionReason::UnreachableArea)) == "unreachable_area");
  CHECK(oracle::hierarchy_violations(h, g, p).empty());
}

TEST_CASE("planted benchmark with large-corpus resolutions") {
  PlantedSpec spec;
  spec.nodes = 10000;
  spec.group_size = {2500, 500, 50};
  spec.level_fraction = {0.07, 0.2, 0.7};
  spec.average_degree = 12;
  spec.isolated = 20;
  spec.small_components = 10;
  spec.small_component_size = 4;
  spec.seed = 3;
  const auto n = spec.total_nodes();
  const auto g = build_relatedness(canonicalize_edges(planted_edges(spec), n), n);
  const auto p = params({8e-8, 2e-6, 5e-5}, {1000, 100, 10}, {3, 3, 3});
  const auto h = build_hierarchy(g, p);
  const auto violations = oracle::hierarchy_violations(h, g, p);
  CHECK(violations.empty());
  for (const auto& v : violations) MESSAGE(v);
  CHECK(h.excluded.size() >= 60);
}

TEST_CASE("assignment files round trip") {
  const auto dir = oracle::fresh_dir("hierarchy_io");
  PublicationTable pubs;
  for (int i = 0; i < 125; ++i) {
    PublicationRecord r;
    r.external_id = "w" + std::to_string(i);
    r.year = 2001;
    pubs.index.emplace(r.external_id, i);
    pubs.records.push_back(r);
  }
  oracle::Pairs pairs = two_cliques(60);
  pairs.emplace_back(120, 121);
  const auto g = oracle::build(125, pairs);
  const auto h = build_hierarchy(g, params({1e-6, 0.01}, {50, 10}, {4, 4}));
  write_assignment(dir / "assignment.tsv", h, pubs);
  write_excluded(dir / "excluded.tsv", h, pubs);
  const auto back = read_hierarchy(dir / "assignment.tsv", dir / "excluded.tsv", pubs);
  REQUIRE(back.level_count() == 2);
  CHECK(back.exclusion == h.exclusion);
  for (int l = 1; l <= 2; ++l) {
    CHECK(back.level(l).final_area == h.level(l).final_area);
    CHECK(back.level(l).area_path == h.level(l).area_path);
    CHECK(back.level(l).area_sizes == h.level(l).area_sizes);
  }
}

TEST_CASE("hierarchy does not depend on the thread count") {
  PlantedSpec spec;
  spec.nodes = 2000;
  spec.group_size = {1000, 200, 40};
  spec.level_fraction = {0.07, 0.2, 0.7};
  const auto n = spec.total_nodes();
  const auto g = build_relatedness(canonicalize_edges(planted_edges(spec), n), n);
  const auto p = params({3e-5, 1e-4, 2e-3}, {300, 60, 12}, {6, 6, 4});
  const auto one = build_hierarchy(g, p, 1);
  const auto four = build_hierarchy(g, p, 4);
  for (int l = 1; l <= 3; ++l) {
    CHECK(one.level(l).final_area == four.level(l).final_area);
    CHECK(one.level(l).best_seed == four.level(l).best_seed);
  }
}
