#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stratum/corpus.hpp"
#include "stratum/hierarchy.hpp"

namespace stratum {

struct LabelParams {
  double m = 25.0;
  int top_k = 5;
  double dedup_threshold = 0.66;
  int min_term_len = 2;  // shorter words break phrases like stopwords do
  int max_ngram = 3;
  std::vector<std::string> stopwords;

  static LabelParams defaults();
};

void validate(const LabelParams& params);

const std::vector<std::string>& default_stopwords();
std::vector<std::string> load_stopwords(const std::filesystem::path& path);

// Produces the distinct candidate terms of one publication.
class TermExtractor {
public:
  virtual ~TermExtractor() = default;
  virtual std::vector<std::string> extract(std::string_view title,
                                           std::string_view abstract) const = 0;
};

// Lowercased word n-grams (1..max_ngram) that never span punctuation or a
// stopword; the last word of each n-gram is reduced to singular form.
class NgramTermExtractor final : public TermExtractor {
public:
  explicit NgramTermExtractor(const LabelParams& params);

  std::vector<std::string> extract(std::string_view title,
                                   std::string_view abstract) const override;

private:
  void extract_segment(std::string_view text, std::vector<std::string>& out) const;

  std::vector<std::string> stopwords_;  // sorted
  int min_word_len_;
  int max_ngram_;
};

// Sorted, distinct.
std::vector<std::string> extract_terms(std::string_view title, std::string_view abstract,
                                       const LabelParams& params);

// ies -> y, ses -> s, trailing s dropped unless the word ends in ss, is or us.
std::string singularize(std::string_view word);

// term -> number of publications whose title or abstract contains it
using TermStats = std::map<std::string, std::int64_t>;

struct ScoredTerm {
  std::string term;
  double relevance = 0.0;

  friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

inline double relevance(std::int64_t area_count, std::int64_t parent_count, double m) {
  return static_cast<double>(area_count) / (static_cast<double>(parent_count) + m);
}

// n_ut / (n_vt + m) for every term of the area. Throws Error("term_containment")
// if a term is missing from the parent or counted more often in the area.
std::vector<ScoredTerm> relevance_scores(const TermStats& area, const TermStats& parent, double m);

std::size_t lcs_length(std::string_view a, std::string_view b);

// Character LCS length over the average length of the two terms.
double term_similarity(std::string_view a, std::string_view b);

// Greedy by descending relevance (ties lexicographic); a term too similar to
// an already selected one is skipped.
std::vector<ScoredTerm> select_labels(std::vector<ScoredTerm> scored, const LabelParams& params);

struct AreaLabelSet {
  int level = 0;
  ClusterId area = 0;
  std::string area_path;
  std::vector<ScoredTerm> terms;
};

// Labels every area at every level against its parent area; level-1 areas
// are scored against all included publications.
std::vector<AreaLabelSet> label_hierarchy(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                          const LabelParams& params,
                                          const TermExtractor& extractor);

void write_labels(const std::filesystem::path& path, const std::vector<AreaLabelSet>& labels);
std::vector<AreaLabelSet> read_labels(const std::filesystem::path& path);

}  // namespace stratum
