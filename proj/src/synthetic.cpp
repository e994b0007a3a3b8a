#include "stratum/synthetic.hpp"

#include <algorithm>
#include <cctype>

#include "stratum/error.hpp"
#include "stratum/random.hpp"
#include "tsv.hpp"

namespace stratum {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprtvz";
constexpr std::string_view kVowels = "aeiou";

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "analysis", "method",     "result",    "data",      "model",    "approach",
      "evidence", "framework",  "effect",    "system",    "process",  "design",
      "survey",   "measure",    "structure", "pattern",   "change",   "impact",
      "review",   "experiment", "theory",    "practice",  "sample",   "trend",
      "estimate", "comparison", "context",   "mechanism", "response", "variation"};
  return words;
}

void check(const PlantedSpec& spec) {
  if (spec.group_size.empty() || spec.group_size.size() != spec.level_fraction.size()) {
    throw Error("invalid_spec", "group_size and level_fraction must have equal, nonzero length");
  }
  for (std::size_t l = 0; l < spec.group_size.size(); ++l) {
    if (spec.group_size[l] < 2) throw Error("invalid_spec", "group sizes must be at least 2");
    if (l > 0 && spec.group_size[l - 1] % spec.group_size[l] != 0) {
      throw Error("invalid_spec", "each group size must be a multiple of the next");
    }
  }
  double total = 0.0;
  for (const double f : spec.level_fraction) total += f;
  if (total > 1.0 + 1e-12) throw Error("invalid_spec", "level fractions exceed 1");
  if (spec.nodes < 2) throw Error("invalid_spec", "need at least two planted nodes");
}

std::string capitalize(std::string word) {
  if (!word.empty()) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

}  // namespace

std::string topic_word(std::size_t id, std::size_t salt) {
  const std::size_t base = kConsonants.size() * kVowels.size();
  std::size_t v = id * 4 + (salt % 4);
  std::string word;
  for (int digits = 0; digits < 3 || v > 0; ++digits) {
    const std::size_t d = v % base;
    v /= base;
    word += kConsonants[d / kVowels.size()];
    word += kVowels[d % kVowels.size()];
  }
  return word;
}

std::vector<Edge> planted_edges(const PlantedSpec& spec) {
  check(spec);
  Rng rng(spec.seed);
  const auto target = static_cast<std::size_t>(static_cast<double>(spec.nodes) *
                                               spec.average_degree / 2.0);
  std::vector<Edge> edges;
  edges.reserve(target + spec.small_components * spec.small_component_size);

  const std::size_t levels = spec.group_size.size();
  for (std::size_t e = 0; e < target; ++e) {
    const std::size_t i = e % spec.nodes;
    const double u = rng.uniform();
    // Finest level first so that the fractions read leaf, ..., top.
    std::size_t lo = 0;
    std::size_t hi = spec.nodes;
    double acc = 0.0;
    for (std::size_t k = levels; k-- > 0;) {
      acc += spec.level_fraction[k];
      if (u < acc) {
        lo = i / spec.group_size[k] * spec.group_size[k];
        hi = std::min(lo + spec.group_size[k], spec.nodes);
        break;
      }
    }
    if (hi - lo < 2) {
      lo = 0;
      hi = spec.nodes;
    }
    std::size_t j;
    do {
      j = lo + rng.below(hi - lo);
    } while (j == i);
    const auto a = static_cast<NodeId>(i);
    const auto b = static_cast<NodeId>(j);
    edges.push_back(rng.below(2) == 0 ? Edge{a, b} : Edge{b, a});
  }

  std::size_t next = spec.nodes + spec.isolated;
  for (std::size_t c = 0; c < spec.small_components; ++c) {
    for (std::size_t k = 1; k < spec.small_component_size; ++k) {
      edges.push_back({static_cast<NodeId>(next + k), static_cast<NodeId>(next + k - 1)});
    }
    next += spec.small_component_size;
  }
  return edges;
}

PublicationTable planted_publications(const PlantedSpec& spec) {
  check(spec);
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto& filler = filler_words();
  const std::size_t levels = spec.group_size.size();
  const std::size_t top = spec.group_size.front();
  const std::size_t mid = spec.group_size[levels >= 2 ? levels - 2 : 0];
  const std::size_t leaf = spec.group_size.back();

  PublicationTable pubs;
  const std::size_t n = spec.total_nodes();
  pubs.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PublicationRecord r;
    r.external_id = "pub" + std::to_string(i + 1);
    const auto pick = [&] { return filler[rng.below(filler.size())]; };
    if (i < spec.nodes) {
      const std::size_t g_leaf = i / leaf;
      const std::size_t g_mid = i / mid;
      const std::size_t g_top = i / top;
      r.year = 2000 + static_cast<int>((g_leaf * 7) % 10) + static_cast<int>(rng.below(3));
      r.title = capitalize(topic_word(g_leaf, 0)) + " " + pick() + " in " + topic_word(g_mid, 1) +
                " " + pick();
      r.abstract = "We report a " + pick() + " of " + topic_word(g_leaf, 0) + " " + pick() +
                   " and its " + pick() + " within " + topic_word(g_top, 2) + ".";
      r.journal = "Journal of " + capitalize(topic_word(g_mid, 1));
      r.categories.push_back("Cat " + capitalize(topic_word(g_top, 2)));
      if (g_mid % 2 == 1) r.categories.push_back("Cat " + capitalize(topic_word(g_mid, 1)));
    } else {
      r.year = 2000 + static_cast<int>(rng.below(12));
      r.title = capitalize(pick()) + " " + pick() + " note";
      r.journal = "Miscellany";
      r.categories.push_back("Cat Misc");
    }
    pubs.index.emplace(r.external_id, static_cast<NodeId>(i));
    pubs.records.push_back(std::move(r));
  }
  return pubs;
}

void write_planted_corpus(const std::filesystem::path& dir, const PlantedSpec& spec) {
  std::filesystem::create_directories(dir);
  const PublicationTable pubs = planted_publications(spec);
  write_publications(dir / "publications.tsv", pubs);
  auto out = tsv::open_output(dir / "citations.tsv");
  out << "citing_id\tcited_id\n";
  for (const Edge& e : planted_edges(spec)) {
    out << pubs.records[e.citing].external_id << '\t' << pubs.records[e.cited].external_id << '\n';
  }
  if (!out) throw Error("io_error", "failed writing citations.tsv");
}

}  // namespace stratum
