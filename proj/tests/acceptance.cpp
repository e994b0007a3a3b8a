// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `acceptance 1 2 5`.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "stratum/analysis.hpp"
#include "stratum/cpm.hpp"
#include "stratum/hierarchy.hpp"
#include "stratum/labeling.hpp"
#include "stratum/random.hpp"
#include "stratum/synthetic.hpp"
#include "support/manual.hpp"
#include "support/oracle.hpp"

using namespace stratum;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (problems.size() < 10) problems.push_back(what);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool same_partition(const std::vector<ClusterId>& x, const std::vector<int>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if ((x[i] == x[j]) != (y[i] == y[j])) return false;
    }
  }
  return true;
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

Verdict oracle_optimality() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> rs = {0.0, 0.01, 1.0 / 27 - 0.001, 1.0 / 27 + 0.001, 0.1, 0.5, 1.0};
  const auto graphs = oracle::small_graph_corpus();
  int checked = 0;
  for (const auto& tg : graphs) {
    const auto dense = oracle::dense_relatedness(tg.n, tg.pairs);
    const auto best = oracle::enumerate_optimum(dense, rs);
    const auto g = oracle::build(tg);
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const auto result = multi_run_optimize(g, rs[k], 100, 1);
      std::vector<int> part(result.assignment.cluster_of.begin(), result.assignment.cluster_of.end());
      const double recomputed = oracle::quality(dense, part, rs[k]);
      v.expect(std::abs(recomputed - best[k].quality) <= 1e-9 &&
                   std::abs(result.quality - best[k].quality) <= 1e-9,
               tg.name + " r=" + num(rs[k]) + ": got " + num(recomputed) + ", optimum " +
                   num(best[k].quality));
      ++checked;
    }
  }
  const double elapsed = seconds_since(start);
  v.expect(graphs.size() >= 30, "fewer than 30 graphs");
  v.expect(elapsed < 60.0, "took " + num(elapsed) + "s");
  v.detail = std::to_string(graphs.size()) + " graphs x " + std::to_string(rs.size()) +
             " resolutions = " + std::to_string(checked) + " optima matched, " + num(elapsed) + "s";
  return v;
}

Verdict resolution_transition() {
  Verdict v;
  const auto pairs = oracle::bridge();
  const auto dense = oracle::dense_relatedness(6, pairs);
  const auto g = oracle::build(6, pairs);
  const std::vector<int> single(6, 0);
  const std::vector<int> triangles = {0, 0, 0, 1, 1, 1};

  const auto at02 = multi_run_optimize(g, 0.02, 100, 1);
  const auto at05 = multi_run_optimize(g, 0.05, 100, 1);
  v.expect(same_partition(at02.assignment.cluster_of, single), "r=0.02 is not a single cluster");
  v.expect(same_partition(at05.assignment.cluster_of, triangles), "r=0.05 is not two triangles");
  v.expect(std::abs(at02.quality - 5.4) <= 1e-9, "r=0.02 quality " + num(at02.quality));

  // Bisection on the enumerated optimum: single cluster below, split above.
  double lo = 0.02;
  double hi = 0.05;
  v.expect(oracle::enumerate_optimum(dense, lo).partition == single, "oracle at 0.02");
  v.expect(oracle::enumerate_optimum(dense, hi).partition == triangles, "oracle at 0.05");
  while (hi - lo > 1e-6) {
    const double mid = (lo + hi) / 2;
    if (oracle::enumerate_optimum(dense, mid).partition == single) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double crossover = (lo + hi) / 2;
  v.expect(std::abs(crossover - 1.0 / 27) <= 1e-4, "crossover " + num(crossover));
  // The optimizer follows the oracle on both sides of the located crossover.
  for (double r : {crossover - 1e-4, crossover + 1e-4}) {
    const auto best = oracle::enumerate_optimum(dense, r);
    const auto got = multi_run_optimize(g, r, 100, 1);
    v.expect(same_partition(got.assignment.cluster_of, best.partition),
             "optimizer disagrees with oracle at r=" + num(r));
  }
  v.detail = "crossover " + num(crossover) + " vs 1/27 = " + num(1.0 / 27);
  return v;
}

Verdict normalization() {
  Verdict v;
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng.below(300));
    const double p = rng.uniform() * 0.05 + (t % 10 == 0 ? 0.0 : 0.001);
    oracle::Pairs pairs = oracle::random_pairs(n, p, 7000 + static_cast<std::uint64_t>(t));
    // A few repeated and reversed rows.
    for (std::size_t k = 0; k < pairs.size() / 10; ++k) {
      pairs.emplace_back(pairs[k].second, pairs[k].first);
    }
    const auto g = oracle::build(n, pairs);
    std::set<int> touched;
    for (const auto& [a, b] : pairs) {
      touched.insert(a);
      touched.insert(b);
    }
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (const double w : g.weights(i)) row += w;
      const double expected = touched.contains(i) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(row - expected));
      v.expect(std::abs(row - expected) <= 1e-12,
               "graph " + std::to_string(t) + " row " + std::to_string(i) + " sums to " + num(row));
      v.expect((g.degree(i) == 0) == !touched.contains(i), "degree mismatch");
      mass += row;
    }
    v.expect(std::abs(mass - static_cast<double>(touched.size())) <= 1e-12 * n,
             "graph " + std::to_string(t) + " mass " + num(mass));
  }
  v.detail = "100 graphs, worst row deviation " + num(worst);
  return v;
}

Verdict hierarchy_structure() {
  Verdict v;
  struct Case {
    std::string name;
    std::uint64_t seed;
    HierarchyParams params;
  };
  const std::vector<Case> cases = {
      {"planted resolutions seed 1", 1, params({1.5e-5, 2e-4, 2e-3}, {1000, 100, 10}, {10, 10, 5})},
      {"planted resolutions seed 2", 2, params({1.5e-5, 2e-4, 2e-3}, {1500, 200, 20}, {10, 10, 5})},
      {"large-corpus resolutions", 3, params({8e-8, 2e-6, 5e-5}, {1000, 100, 10}, {10, 10, 5})},
      {"coarse resolutions", 4, params({1e-6, 1e-5, 1e-4}, {2000, 500, 50}, {10, 10, 5})},
  };
  std::ostringstream detail;
  for (const auto& c : cases) {
    PlantedSpec spec;
    spec.nodes = 10000 - 200;
    spec.group_size = {2450, 490, 49};
    spec.level_fraction = {0.07, 0.2, 0.7};
    spec.average_degree = 12;
    spec.isolated = 40;
    spec.small_components = 20;
    spec.small_component_size = 8;
    spec.seed = c.seed;
    const auto n = spec.total_nodes();
    const auto g = build_relatedness(canonicalize_edges(planted_edges(spec), n), n);
    const auto h = build_hierarchy(g, c.params);
    const auto violations = oracle::hierarchy_violations(h, g, c.params);
    for (const auto& problem : violations) v.expect(false, c.name + ": " + problem);
    // Components below the finest minimum exist and are excluded.
    std::size_t small = 0;
    const auto comps = connected_components(g);
    for (std::size_t i = 0; i < n; ++i) {
      if (comps.component_size[comps.component_id[i]] < c.params.min_size.back()) ++small;
    }
    v.expect(small > 0 || c.params.min_size.back() <= 8, c.name + ": no small components");
    detail << c.name << ": " << h.level(1).area_count() << "/" << h.level(2).area_count() << "/"
           << h.level(3).area_count() << " areas, " << h.excluded.size() << " excluded, "
           << violations.size() << " violations; ";
  }
  v.detail = detail.str();
  return v;
}

Verdict gain_consistency() {
  Verdict v;
  Rng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3 + static_cast<int>(rng.below(30));
    const auto pairs = oracle::random_pairs(n, 0.05 + rng.uniform() * 0.5, 20000 + t);
    const auto g = oracle::build(n, pairs);
    const auto dense = oracle::dense_relatedness(n, pairs);
    Assignment assign{std::vector<ClusterId>(n)};
    const auto groups = 1 + rng.below(6);
    for (auto& c : assign.cluster_of) c = static_cast<ClusterId>(rng.below(groups));
    canonicalize(assign.cluster_of);
    const double r = t % 7 == 0 ? 0.0 : rng.uniform();
    const auto node = static_cast<NodeId>(rng.below(n));
    const auto target = static_cast<ClusterId>(rng.below(assign.cluster_count() + 1));

    std::vector<int> before(assign.cluster_of.begin(), assign.cluster_of.end());
    std::vector<int> after = before;
    after[node] = target;
    const double expected = oracle::quality(dense, after, r) - oracle::quality(dense, before, r);
    const double gain = local_move_gain(g, assign, node, target, r);
    worst = std::max(worst, std::abs(gain - expected));
    v.expect(std::abs(gain - expected) <= 1e-9,
             "move " + std::to_string(t) + ": gain " + num(gain) + " vs " + num(expected));
  }
  v.detail = "1000 moves, worst difference " + num(worst);
  return v;
}

Verdict labeling() {
  Verdict v;
  v.expect(relevance(30, 50, 25) == 0.4, "30/(50+25)");
  for (int a = 1; a < 100; ++a) {
    v.expect(relevance(a + 1, 120, 25) > relevance(a, 120, 25), "increasing in n_ut");
    v.expect(relevance(a, 120 + a, 25) < relevance(a, 119 + a, 25), "decreasing in n_vt");
    v.expect(relevance(a, 120, 25 + a) < relevance(a, 120, 24 + a), "decreasing in m");
  }
  v.expect(term_similarity("library", "librarian") == 0.75, "library/librarian");

  // Dedup invariant over random candidate sets.
  Rng rng(5);
  LabelParams p = LabelParams::defaults();
  for (int t = 0; t < 200; ++t) {
    std::vector<ScoredTerm> scored;
    for (int k = 0; k < 25; ++k) {
      std::string term;
      for (auto len = 3 + rng.below(8); len > 0; --len) term += static_cast<char>('a' + rng.below(4));
      scored.push_back({term, rng.uniform()});
    }
    const auto picked = select_labels(scored, p);
    v.expect(picked.size() <= static_cast<std::size_t>(p.top_k), "too many labels");
    for (std::size_t i = 0; i < picked.size(); ++i) {
      for (std::size_t j = i + 1; j < picked.size(); ++j) {
        v.expect(term_similarity(picked[i].term, picked[j].term) < p.dedup_threshold,
                 "near-duplicate labels " + picked[i].term + " / " + picked[j].term);
      }
    }
  }

  // 200 documents in 4 clusters; each cluster has a planted term in every
  // document, plus shared vocabulary drawn at random.
  const std::vector<std::string> planted = {"holography", "enzymology", "bibliometry",
                                            "glaciology"};
  const std::vector<std::string> shared = {"model", "analysis", "data", "evidence", "approach",
                                           "measurement", "framework", "result", "sample",
                                           "experiment", "review", "structure"};
  std::vector<PublicationRecord> records;
  std::vector<ClusterId> area;
  for (int d = 0; d < 200; ++d) {
    const int c = d % 4;
    std::string title = "On " + planted[static_cast<std::size_t>(c)];
    std::string abstract;
    for (int k = 0; k < 6; ++k) abstract += shared[rng.below(shared.size())] + ". ";
    records.push_back(manual::record("d" + std::to_string(d), 2005, title));
    records.back().abstract = abstract;
    area.push_back(c);
  }
  const auto pubs = manual::table(records);
  const auto h = manual::hierarchy({area});
  const auto labels = label_hierarchy(h, pubs, p, NgramTermExtractor(p));
  int hits = 0;
  for (const auto& set : labels) {
    std::size_t first = 0;
    while (h.level(1).final_area[first] != set.area) ++first;
    const auto& expected = planted[static_cast<std::size_t>(area[first])];
    const bool ok = !set.terms.empty() && set.terms.front().term == expected;
    hits += ok;
    v.expect(ok, "area " + set.area_path + " top label '" +
                     (set.terms.empty() ? "" : set.terms.front().term) + "', expected '" +
                     expected + "'");
  }
  v.expect(labels.size() == 4, "expected four labelled areas");
  v.detail = "relevance, similarity and dedup checks; planted term ranked first in " +
             std::to_string(hits) + "/4 clusters";
  return v;
}

int run_cli(const std::string& args) {
  const std::string command = std::string("\"") + STRATUM_CLI + "\" " + args + " 2> /dev/null";
  return std::system(command.c_str());
}

Verdict determinism() {
  Verdict v;
  const auto dir = oracle::fresh_dir("acceptance_determinism");
  PlantedSpec spec;
  spec.nodes = 4000;
  spec.group_size = {1000, 200, 40};
  spec.level_fraction = {0.07, 0.2, 0.7};
  spec.isolated = 25;
  spec.small_components = 10;
  spec.small_component_size = 5;
  spec.seed = 17;
  write_planted_corpus(dir / "corpus", spec);
  auto journal = topic_word(3, 1);
  journal[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(journal[0])));
  std::ofstream(dir / "run.conf") << "publications = corpus/publications.tsv\n"
                                     "citations = corpus/citations.tsv\n"
                                     "levels = 3\n"
                                     "resolution = 3e-5, 1.5e-4, 2e-3\n"
                                     "min_size = 300, 60, 12\n"
                                     "runs = 40, 40, 20\n"
                                     "seed = 7\n"
                                  << "journals = Journal of " << journal << "\n";
  const auto conf = (dir / "run.conf").string();
  const int a = run_cli("all -c \"" + conf + "\" -o \"" + (dir / "t1").string() + "\" --threads 1");
  const int b = run_cli("all -c \"" + conf + "\" -o \"" + (dir / "t8").string() + "\" --threads 8");
  v.expect(a == 0 && b == 0, "pipeline exited with an error");
  const auto one = oracle::read_tree(dir / "t1");
  const auto eight = oracle::read_tree(dir / "t8");
  v.expect(one.size() > 10, "too few output files");
  v.expect(one == eight, "output trees differ");
  for (const auto& [name, bytes] : one) {
    const auto it = eight.find(name);
    v.expect(it != eight.end() && it->second == bytes, "differs: " + name);
  }
  v.detail = std::to_string(one.size()) + " files compared byte for byte";
  return v;
}

Verdict scale() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  PlantedSpec spec;
  spec.nodes = 1000000;
  spec.group_size = {100000, 10000, 1000};
  spec.level_fraction = {0.07, 0.2, 0.7};
  spec.average_degree = 20.4;
  spec.seed = 8;
  constexpr std::size_t kEdges = 10000000;
  EdgeList edges = canonicalize_edges(planted_edges(spec), spec.nodes);
  v.expect(edges.edges.size() >= kEdges, "only " + std::to_string(edges.edges.size()) + " edges");
  edges.edges.resize(std::min(edges.edges.size(), kEdges));
  const auto g = build_relatedness(edges, spec.nodes);
  edges = {};
  const double built = seconds_since(start);

  const auto p = params({1.5e-7, 4e-6, 1e-4}, {5000, 500, 50}, {10, 10, 5});
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto h = build_hierarchy(g, p, threads);
  const double elapsed = seconds_since(start);

  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);
  const auto violations = oracle::hierarchy_violations(h, g, p);
  for (const auto& problem : violations) v.expect(false, problem);
  v.expect(elapsed < 1800.0, "took " + num(elapsed) + "s");
  v.expect(peak_gb < 16.0, "peak memory " + num(peak_gb) + " GB");
  std::ostringstream detail;
  detail << spec.nodes << " nodes, " << g.entry_count() / 2 << " edges, " << threads
         << " thread(s): graph " << built << "s, total " << elapsed << "s, peak " << peak_gb
         << " GB, areas " << h.level(1).area_count() << "/" << h.level(2).area_count() << "/"
         << h.level(3).area_count();
  v.detail = detail.str();
  return v;
}

Verdict fractional_overlap() {
  Verdict v;
  struct Fixture {
    std::vector<std::vector<std::string>> categories;
    std::map<std::string, double> expected;
  };
  const std::vector<Fixture> fixtures = {
      {{{"A"}, {"A", "B"}}, {{"A", 75.0}, {"B", 25.0}}},
      {{{"A"}}, {{"A", 100.0}}},
      {{{"A", "B", "C"}, {}, {"C"}}, {{"A", 100.0 / 6}, {"B", 100.0 / 6}, {"C", 200.0 / 3}}},
      {{{"A", "B"}, {"B", "C"}, {"C", "D"}, {"D"}},
       {{"A", 12.5}, {"B", 25.0}, {"C", 25.0}, {"D", 37.5}}},
      {{{"X", "Y", "Z"}, {"X"}, {"X"}}, {{"X", 700.0 / 9}, {"Y", 100.0 / 9}, {"Z", 100.0 / 9}}},
  };
  int checked = 0;
  for (const auto& f : fixtures) {
    std::vector<PublicationRecord> records;
    for (std::size_t i = 0; i < f.categories.size(); ++i) {
      records.push_back(manual::record("p" + std::to_string(i), 2001, "", f.categories[i]));
    }
    // A second area that must not leak into the first.
    records.push_back(manual::record("other", 2001, "", {"Q"}));
    std::vector<ClusterId> area(f.categories.size(), 0);
    area.push_back(1);
    const auto pubs = manual::table(records);
    const auto h = manual::hierarchy({area});
    const auto shares = category_overlap(h, pubs, 1, h.level(1).final_area[0]);
    double sum = 0.0;
    v.expect(shares.size() == f.expected.size(), "wrong number of categories");
    for (const auto& s : shares) {
      sum += s.percentage;
      const auto it = f.expected.find(s.category);
      v.expect(it != f.expected.end() && std::abs(it->second - s.percentage) <= 1e-9,
               "category " + s.category + " = " + num(s.percentage));
      ++checked;
    }
    v.expect(std::abs(sum - 100.0) <= 1e-9, "sum " + num(sum));
  }
  // Random fixtures against an independent tally.
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    std::vector<PublicationRecord> records;
    std::map<std::string, double> tally;
    double base = 0.0;
    const auto n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::string> cats;
      for (auto k = rng.below(4); k > 0; --k) cats.insert(std::string(1, static_cast<char>('A' + rng.below(6))));
      for (const auto& c : cats) tally[c] += 1.0 / static_cast<double>(cats.size());
      if (!cats.empty()) base += 1.0;
      records.push_back(manual::record("p" + std::to_string(i), 2001, "", {cats.begin(), cats.end()}));
    }
    const auto pubs = manual::table(records);
    const auto shares =
        category_overlap(manual::hierarchy({std::vector<ClusterId>(n, 0)}), pubs, 1, 0);
    double sum = 0.0;
    v.expect(shares.size() == tally.size(), "random fixture category count");
    for (const auto& s : shares) {
      sum += s.percentage;
      v.expect(std::abs(s.percentage - 100.0 * tally[s.category] / base) <= 1e-9,
               "random fixture " + std::to_string(t) + " category " + s.category);
    }
    if (!shares.empty()) v.expect(std::abs(sum - 100.0) <= 1e-9, "random sum " + num(sum));
  }
  v.detail = std::to_string(fixtures.size()) + " hand fixtures (" + std::to_string(checked) +
             " shares) and 100 random fixtures";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Verdict (*)()>> criteria = {
      {"oracle optimality on small graphs", oracle_optimality},
      {"resolution transition on the bridge graph", resolution_transition},
      {"normalization row sums and mass", normalization},
      {"hierarchy structure on planted 10k graphs", hierarchy_structure},
      {"move gain matches recomputed quality", gain_consistency},
      {"labeling relevance, similarity, dedup, planted corpus", labeling},
      {"determinism across thread counts", determinism},
      {"scale: 1M nodes, 10M edges, 3 levels", scale},
      {"fractional category overlap", fractional_overlap},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.problems.push_back(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[k].first
              << " -- " << v.detail << std::endl;
    for (const auto& problem : v.problems) std::cout << "    " << problem << '\n';
  }
  return failed == 0 ? 0 : 1;
}
