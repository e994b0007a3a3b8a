#include "stratum/labeling.hpp"

#include <algorithm>
#include <unordered_map>

#include "stratum/error.hpp"
#include "tsv.hpp"

namespace stratum {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// Separators inside a phrase; every other non-word byte ends the phrase.
bool is_soft_separator(unsigned char c) {
  return c == ' ' || c == '-' || c == '\t' || c == '\n' || c == '\r';
}

bool all_digits(std::string_view word) {
  return std::all_of(word.begin(), word.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

LabelParams LabelParams::defaults() {
  LabelParams p;
  p.stopwords = default_stopwords();
  return p;
}

void validate(const LabelParams& params) {
  if (!(params.m >= 0.0)) throw Error("invalid_label_params", "m must be nonnegative");
  if (params.top_k < 1) throw Error("invalid_label_params", "top_k must be at least 1");
  if (!(params.dedup_threshold >= 0.0 && params.dedup_threshold <= 1.0)) {
    throw Error("invalid_label_params", "dedup_threshold must lie in [0, 1]");
  }
  if (params.max_ngram < 1) throw Error("invalid_label_params", "max_ngram must be at least 1");
  if (params.min_term_len < 1) {
    throw Error("invalid_label_params", "min_term_len must be at least 1");
  }
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",       "about",   "above",  "after",   "again",   "against", "all",     "also",
      "although", "am",     "among",  "an",      "and",     "another", "any",     "are",
      "as",      "at",      "be",     "because", "been",    "before",  "being",   "below",
      "between", "both",    "but",    "by",      "can",     "could",   "did",     "do",
      "does",    "doing",   "down",   "during",  "each",    "either",  "et",      "etc",
      "few",     "for",     "from",   "further", "had",     "has",     "have",    "having",
      "he",      "her",     "here",   "hers",    "him",     "his",     "how",     "however",
      "i",       "if",      "in",     "into",    "is",      "it",      "its",     "itself",
      "just",    "less",    "may",    "me",      "might",   "more",    "most",    "much",
      "must",    "my",      "neither", "no",     "nor",     "not",     "now",     "of",
      "off",     "on",      "once",   "one",     "only",    "or",      "other",   "our",
      "ours",    "out",     "over",   "own",     "per",     "same",    "shall",   "she",
      "should",  "since",   "so",     "some",    "such",    "than",    "that",    "the",
      "their",   "theirs",  "them",   "then",    "there",   "these",   "they",    "this",
      "those",   "through", "thus",   "to",      "too",     "two",     "under",   "until",
      "up",      "upon",    "us",     "using",   "very",    "via",     "was",     "we",
      "were",    "what",    "when",   "where",   "whether", "which",   "while",   "who",
      "whom",    "whose",   "why",    "will",    "with",    "within",  "without", "would",
      "yet",     "you",     "your",   "yours"};
  return words;
}

std::vector<std::string> load_stopwords(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  std::vector<std::string> words;
  std::string line;
  while (tsv::read_line(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.push_back(std::move(word));
  }
  return words;
}

std::string singularize(std::string_view word) {
  std::string out(word);
  if (ends_with(word, "ies")) {
    out.resize(out.size() - 3);
    out += 'y';
  } else if (ends_with(word, "ses")) {
    out.resize(out.size() - 2);
  } else if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "is") &&
             !ends_with(word, "us")) {
    out.pop_back();
  }
  return out.empty() ? std::string(word) : out;
}

NgramTermExtractor::NgramTermExtractor(const LabelParams& params)
    : stopwords_(params.stopwords), min_word_len_(params.min_term_len),
      max_ngram_(params.max_ngram) {
  validate(params);
  std::sort(stopwords_.begin(), stopwords_.end());
}

void NgramTermExtractor::extract_segment(std::string_view text,
                                         std::vector<std::string>& out) const {
  std::vector<std::string> phrase;
  std::string word;
  std::size_t apostrophe = std::string::npos;

  const auto flush_phrase = [&] {
    for (std::size_t s = 0; s < phrase.size(); ++s) {
      std::string term;
      for (std::size_t len = 1; len <= static_cast<std::size_t>(max_ngram_) && s + len <= phrase.size();
           ++len) {
        if (len > 1) term += ' ';
        const std::string& w = phrase[s + len - 1];
        out.push_back(term + singularize(w));
        term += w;
      }
    }
    phrase.clear();
  };
  const auto end_word = [&] {
    // Possessive 's is dropped whole.
    if (apostrophe != std::string::npos && apostrophe + 1 == word.size() && word.back() == 's') {
      word.pop_back();
    }
    apostrophe = std::string::npos;
    if (word.empty()) return;
    const bool breaks = static_cast<int>(word.size()) < min_word_len_ || all_digits(word) ||
                        std::binary_search(stopwords_.begin(), stopwords_.end(), word);
    if (breaks) {
      flush_phrase();
    } else {
      phrase.push_back(word);
    }
    word.clear();
  };

  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      word += static_cast<char>(std::tolower(c));
    } else if (c == '\'') {
      apostrophe = word.size();
    } else if (is_soft_separator(c)) {
      end_word();
    } else {
      end_word();
      flush_phrase();
    }
  }
  end_word();
  flush_phrase();
}

std::vector<std::string> NgramTermExtractor::extract(std::string_view title,
                                                     std::string_view abstract) const {
  std::vector<std::string> terms;
  extract_segment(title, terms);
  extract_segment(abstract, terms);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

std::vector<std::string> extract_terms(std::string_view title, std::string_view abstract,
                                       const LabelParams& params) {
  return NgramTermExtractor(params).extract(title, abstract);
}

std::vector<ScoredTerm> relevance_scores(const TermStats& area, const TermStats& parent, double m) {
  std::vector<ScoredTerm> scored;
  scored.reserve(area.size());
  for (const auto& [term, count] : area) {
    const auto it = parent.find(term);
    if (it == parent.end() || it->second < count) {
      throw Error("term_containment",
                  "term '" + term + "' is counted more often in the area than in its parent");
    }
    scored.push_back({term, relevance(count, it->second, m)});
  }
  return scored;
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double term_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  const double average = 0.5 * static_cast<double>(a.size() + b.size());
  return static_cast<double>(lcs_length(a, b)) / average;
}

std::vector<ScoredTerm> select_labels(std::vector<ScoredTerm> scored, const LabelParams& params) {
  std::sort(scored.begin(), scored.end(), [](const ScoredTerm& x, const ScoredTerm& y) {
    if (x.relevance != y.relevance) return x.relevance > y.relevance;
    return x.term < y.term;
  });
  std::vector<ScoredTerm> selected;
  for (auto& candidate : scored) {
    if (selected.size() >= static_cast<std::size_t>(params.top_k)) break;
    const bool duplicate = std::any_of(selected.begin(), selected.end(), [&](const ScoredTerm& s) {
      return term_similarity(s.term, candidate.term) >= params.dedup_threshold;
    });
    if (!duplicate) selected.push_back(std::move(candidate));
  }
  return selected;
}

std::vector<AreaLabelSet> label_hierarchy(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                          const LabelParams& params,
                                          const TermExtractor& extractor) {
  validate(params);
  const std::size_t n = hierarchy.node_count();
  if (pubs.size() != n) throw Error("assignment_size", "hierarchy and corpus sizes differ");

  std::unordered_map<std::string, std::uint32_t> vocabulary_index;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<std::uint32_t>> pub_terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!hierarchy.included(static_cast<NodeId>(i))) continue;
    const auto& record = pubs.records[i];
    for (auto& term : extractor.extract(record.title, record.abstract)) {
      auto [it, inserted] =
          vocabulary_index.try_emplace(term, static_cast<std::uint32_t>(vocabulary.size()));
      if (inserted) vocabulary.push_back(std::move(term));
      pub_terms[i].push_back(it->second);
    }
  }

  struct Counter {
    std::vector<std::int64_t> count;
    std::vector<std::uint32_t> touched;

    void add(const std::vector<std::uint32_t>& terms) {
      for (const auto t : terms) {
        if (count[t]++ == 0) touched.push_back(t);
      }
    }
    void clear() {
      for (const auto t : touched) count[t] = 0;
      touched.clear();
    }
  };
  Counter parent{std::vector<std::int64_t>(vocabulary.size(), 0), {}};
  Counter child{std::vector<std::int64_t>(vocabulary.size(), 0), {}};

  std::vector<AreaLabelSet> labels;
  for (std::size_t idx = 0; idx < hierarchy.level_count(); ++idx) {
    const LevelResult& level = hierarchy.levels[idx];
    const std::size_t k = level.area_count();
    const std::size_t parents = idx == 0 ? 1 : hierarchy.levels[idx - 1].area_count();

    std::vector<std::vector<std::uint32_t>> members(k);
    std::vector<std::vector<std::uint32_t>> parent_members(parents);
    for (std::size_t i = 0; i < n; ++i) {
      const ClusterId c = level.final_area[i];
      if (c < 0) continue;
      members[c].push_back(static_cast<std::uint32_t>(i));
      const ClusterId p = idx == 0 ? 0 : hierarchy.levels[idx - 1].final_area[i];
      parent_members[p].push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<std::vector<ClusterId>> children(parents);
    for (std::size_t c = 0; c < k; ++c) {
      children[idx == 0 ? 0 : level.parent[c]].push_back(static_cast<ClusterId>(c));
    }

    const std::size_t first_label = labels.size();
    labels.resize(first_label + k);
    for (std::size_t p = 0; p < parents; ++p) {
      for (const auto i : parent_members[p]) parent.add(pub_terms[i]);
      for (const ClusterId c : children[p]) {
        for (const auto i : members[c]) child.add(pub_terms[i]);
        std::vector<ScoredTerm> scored;
        scored.reserve(child.touched.size());
        for (const auto t : child.touched) {
          scored.push_back({vocabulary[t], relevance(child.count[t], parent.count[t], params.m)});
        }
        child.clear();
        AreaLabelSet& set = labels[first_label + static_cast<std::size_t>(c)];
        set.level = level.level;
        set.area = c;
        set.area_path = level.area_path[c];
        set.terms = select_labels(std::move(scored), params);
      }
      parent.clear();
    }
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<AreaLabelSet>& labels) {
  auto out = tsv::open_output(path);
  out << "area_path\trank\tterm\trelevance\n";
  for (const auto& set : labels) {
    for (std::size_t r = 0; r < set.terms.size(); ++r) {
      out << set.area_path << '\t' << r + 1 << '\t' << set.terms[r].term << '\t'
          << tsv::format_double(set.terms[r].relevance) << '\n';
    }
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

std::vector<AreaLabelSet> read_labels(const std::filesystem::path& path) {
  auto in = tsv::open_input(path);
  std::string line;
  std::vector<std::string_view> fields;
  tsv::read_line(in, line);
  std::vector<AreaLabelSet> labels;
  while (tsv::read_line(in, line)) {
    if (line.empty()) continue;
    tsv::split(line, '\t', fields);
    if (fields.size() != 4) throw Error("malformed_row", path.string() + ": expected 4 fields");
    const auto relevance_value = tsv::parse_number<double>(fields[3]);
    if (!relevance_value) throw Error("malformed_row", path.string() + ": bad relevance");
    if (labels.empty() || labels.back().area_path != fields[0]) {
      AreaLabelSet set;
      set.area_path = std::string(fields[0]);
      set.level = 1 + static_cast<int>(std::count(fields[0].begin(), fields[0].end(), '.'));
      labels.push_back(std::move(set));
    }
    labels.back().terms.push_back({std::string(fields[2]), *relevance_value});
  }
  return labels;
}

}  // namespace stratum
