#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stratum/corpus.hpp"
#include "stratum/hierarchy.hpp"
#include "stratum/labeling.hpp"

namespace stratum {

struct AreaSize {
  std::string area_path;
  ClusterId area = 0;
  std::int64_t size = 0;
};

struct SizeDistribution {
  int level = 0;
  std::vector<AreaSize> areas;  // size descending, then area id
  // bins[k] counts areas with size in [2^k, 2^(k+1))
  std::vector<std::int64_t> log2_bins;
  std::int64_t min = 0;
  std::int64_t max = 0;
  double mean = 0.0;
  std::int64_t total = 0;
};

SizeDistribution size_distribution(const Hierarchy& hierarchy, int level);

struct AreaReport {
  std::string area_path;
  ClusterId area = 0;
  std::int64_t size = 0;
  double average_year = 0.0;
  std::vector<std::pair<std::string, std::int64_t>> top_journals;
  std::vector<std::string> terms;
};

// Areas ranked by average publication year, newest first; ties by size
// descending, then area id. `labels` may be empty.
std::vector<AreaReport> hot_areas(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                  int level, std::size_t top_n,
                                  const std::vector<AreaLabelSet>& labels = {},
                                  std::size_t journals_per_area = 3);

struct CategoryShare {
  std::string category;
  double percentage = 0.0;
};

// Fractional counting: a publication with k categories adds 1/k to each.
// Percentages are relative to the area's publications with any category.
std::vector<CategoryShare> category_overlap(const Hierarchy& hierarchy,
                                            const PublicationTable& pubs, int level,
                                            ClusterId area);

struct YearExclusion {
  int year = 0;
  std::int64_t total = 0;
  std::int64_t excluded = 0;
  double percentage = 0.0;
};

struct CategoryExclusion {
  std::string category;
  double total = 0.0;     // fractional publication count
  double excluded = 0.0;  // fractional excluded count
  double percentage = 0.0;
};

struct ExclusionStats {
  std::int64_t publications = 0;
  std::int64_t excluded = 0;
  double overall_percentage = 0.0;
  double no_relation_share = 0.0;  // percent of excluded publications without relations
  std::vector<YearExclusion> per_year;              // ascending year
  std::vector<CategoryExclusion> per_category;      // percentage descending, then name
};

ExclusionStats exclusion_stats(const Hierarchy& hierarchy, const PublicationTable& pubs);

struct CitedPublication {
  std::string external_id;
  std::int64_t citations = 0;
};

struct JournalAreaCount {
  std::string area_path;
  ClusterId area = 0;
  std::int64_t count = 0;
  std::vector<CitedPublication> most_cited;
};

struct JournalDistribution {
  bool journal_found = false;
  std::int64_t publications = 0;
  std::int64_t excluded = 0;
  std::vector<JournalAreaCount> areas;  // count descending, then area id
};

// Journal names match case-insensitively. Citation counts are in-corpus
// in-degrees from the citation edge list.
JournalDistribution journal_distribution(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                         const EdgeList& citations, const std::string& journal,
                                         int level, std::size_t most_cited_per_area = 3);

struct AreaLink {
  std::string source;
  std::string target;
  std::int64_t relations = 0;
};

// Citation relations crossing each unordered pair of areas at one level.
std::vector<AreaLink> area_links(const Hierarchy& hierarchy, const EdgeList& citations, int level);

void write_size_distribution(const std::filesystem::path& path, const SizeDistribution& dist);
void write_hot_areas(const std::filesystem::path& path, const std::vector<AreaReport>& reports);
void write_category_overlap(const std::filesystem::path& path,
                            const std::vector<CategoryShare>& shares);
void write_exclusion_stats(const std::filesystem::path& path, const ExclusionStats& stats);
void write_journal_distribution(const std::filesystem::path& path,
                                const JournalDistribution& dist);
void write_area_links(const std::filesystem::path& path, const std::vector<AreaLink>& links);

// Lowercase alphanumerics, other runs collapsed to '_'.
std::string slugify(const std::string& text);

}  // namespace stratum
