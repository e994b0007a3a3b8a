#include "stratum/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <unordered_map>

#include "stratum/error.hpp"
#include "tsv.hpp"

namespace stratum {

namespace {

const LevelResult& checked_level(const Hierarchy& h, int level) {
  if (level < 1 || static_cast<std::size_t>(level) > h.level_count()) {
    throw Error("invalid_level", "level " + std::to_string(level) + " outside 1.." +
                                     std::to_string(h.level_count()));
  }
  return h.level(level);
}

void check_corpus(const Hierarchy& h, const PublicationTable& pubs) {
  if (pubs.size() != h.node_count()) {
    throw Error("assignment_size", "hierarchy and corpus sizes differ");
  }
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> distinct_categories(const PublicationRecord& record) {
  std::vector<std::string> cats = record.categories;
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return cats;
}

}  // namespace

SizeDistribution size_distribution(const Hierarchy& hierarchy, int level) {
  const LevelResult& lr = checked_level(hierarchy, level);
  SizeDistribution dist;
  dist.level = level;
  for (std::size_t a = 0; a < lr.area_count(); ++a) {
    dist.areas.push_back({lr.area_path[a], static_cast<ClusterId>(a), lr.area_sizes[a]});
  }
  std::sort(dist.areas.begin(), dist.areas.end(), [](const AreaSize& x, const AreaSize& y) {
    return x.size != y.size ? x.size > y.size : x.area < y.area;
  });
  if (dist.areas.empty()) return dist;

  dist.max = dist.areas.front().size;
  dist.min = dist.areas.back().size;
  for (const auto& a : dist.areas) {
    dist.total += a.size;
    std::size_t bin = 0;
    while ((std::int64_t{2} << bin) <= a.size) ++bin;
    if (dist.log2_bins.size() <= bin) dist.log2_bins.resize(bin + 1, 0);
    ++dist.log2_bins[bin];
  }
  dist.mean = static_cast<double>(dist.total) / static_cast<double>(dist.areas.size());
  return dist;
}

std::vector<AreaReport> hot_areas(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                  int level, std::size_t top_n,
                                  const std::vector<AreaLabelSet>& labels,
                                  std::size_t journals_per_area) {
  const LevelResult& lr = checked_level(hierarchy, level);
  check_corpus(hierarchy, pubs);
  if (top_n < 1) throw Error("invalid_top_n", "top_n must be at least 1");

  const std::size_t k = lr.area_count();
  std::vector<double> year_sum(k, 0.0);
  std::vector<std::map<std::string, std::int64_t>> journals(k);
  for (std::size_t i = 0; i < hierarchy.node_count(); ++i) {
    const ClusterId c = lr.final_area[i];
    if (c < 0) continue;
    year_sum[c] += pubs.records[i].year;
    if (!pubs.records[i].journal.empty()) ++journals[c][pubs.records[i].journal];
  }
  std::unordered_map<std::string, const AreaLabelSet*> label_of;
  for (const auto& set : labels) label_of.emplace(set.area_path, &set);

  std::vector<AreaReport> reports;
  reports.reserve(k);
  for (std::size_t a = 0; a < k; ++a) {
    AreaReport report;
    report.area_path = lr.area_path[a];
    report.area = static_cast<ClusterId>(a);
    report.size = lr.area_sizes[a];
    report.average_year = year_sum[a] / static_cast<double>(report.size);
    report.top_journals.assign(journals[a].begin(), journals[a].end());
    std::stable_sort(report.top_journals.begin(), report.top_journals.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    if (report.top_journals.size() > journals_per_area) report.top_journals.resize(journals_per_area);
    if (const auto it = label_of.find(report.area_path); it != label_of.end()) {
      for (const auto& t : it->second->terms) report.terms.push_back(t.term);
    }
    reports.push_back(std::move(report));
  }
  std::sort(reports.begin(), reports.end(), [](const AreaReport& x, const AreaReport& y) {
    if (x.average_year != y.average_year) return x.average_year > y.average_year;
    if (x.size != y.size) return x.size > y.size;
    return x.area < y.area;
  });
  if (reports.size() > top_n) reports.resize(top_n);
  return reports;
}

std::vector<CategoryShare> category_overlap(const Hierarchy& hierarchy,
                                            const PublicationTable& pubs, int level,
                                            ClusterId area) {
  const LevelResult& lr = checked_level(hierarchy, level);
  check_corpus(hierarchy, pubs);
  if (area < 0 || static_cast<std::size_t>(area) >= lr.area_count()) {
    throw Error("invalid_area", "no area " + std::to_string(area) + " at level " +
                                    std::to_string(level));
  }
  std::map<std::string, double> weight;
  std::int64_t base = 0;
  for (std::size_t i = 0; i < hierarchy.node_count(); ++i) {
    if (lr.final_area[i] != area) continue;
    const auto cats = distinct_categories(pubs.records[i]);
    if (cats.empty()) continue;
    ++base;
    const double share = 1.0 / static_cast<double>(cats.size());
    for (const auto& c : cats) weight[c] += share;
  }
  std::vector<CategoryShare> shares;
  for (const auto& [category, w] : weight) {
    shares.push_back({category, 100.0 * w / static_cast<double>(base)});
  }
  std::stable_sort(shares.begin(), shares.end(), [](const CategoryShare& x, const CategoryShare& y) {
    return x.percentage > y.percentage;
  });
  return shares;
}

ExclusionStats exclusion_stats(const Hierarchy& hierarchy, const PublicationTable& pubs) {
  check_corpus(hierarchy, pubs);
  ExclusionStats stats;
  stats.publications = static_cast<std::int64_t>(hierarchy.node_count());
  stats.excluded = static_cast<std::int64_t>(hierarchy.excluded.size());

  std::map<int, YearExclusion> years;
  std::map<std::string, CategoryExclusion> categories;
  std::int64_t no_relations = 0;
  for (std::size_t i = 0; i < hierarchy.node_count(); ++i) {
    const auto& record = pubs.records[i];
    const bool excluded = !hierarchy.included(static_cast<NodeId>(i));
    auto& y = years[record.year];
    y.year = record.year;
    ++y.total;
    if (excluded) ++y.excluded;
    if (hierarchy.exclusion[i] == ExclusionReason::NoRelations) ++no_relations;

    const auto cats = distinct_categories(record);
    for (const auto& c : cats) {
      auto& entry = categories[c];
      entry.category = c;
      const double share = 1.0 / static_cast<double>(cats.size());
      entry.total += share;
      if (excluded) entry.excluded += share;
    }
  }
  if (stats.publications > 0) {
    stats.overall_percentage =
        100.0 * static_cast<double>(stats.excluded) / static_cast<double>(stats.publications);
  }
  if (stats.excluded > 0) {
    stats.no_relation_share =
        100.0 * static_cast<double>(no_relations) / static_cast<double>(stats.excluded);
  }
  for (auto& [year, y] : years) {
    y.percentage = 100.0 * static_cast<double>(y.excluded) / static_cast<double>(y.total);
    stats.per_year.push_back(y);
  }
  for (auto& [name, c] : categories) {
    c.percentage = 100.0 * c.excluded / c.total;
    stats.per_category.push_back(c);
  }
  std::stable_sort(stats.per_category.begin(), stats.per_category.end(),
                   [](const CategoryExclusion& x, const CategoryExclusion& y) {
                     return x.percentage > y.percentage;
                   });
  return stats;
}

JournalDistribution journal_distribution(const Hierarchy& hierarchy, const PublicationTable& pubs,
                                         const EdgeList& citations, const std::string& journal,
                                         int level, std::size_t most_cited_per_area) {
  const LevelResult& lr = checked_level(hierarchy, level);
  check_corpus(hierarchy, pubs);
  const std::string wanted = lowercase(journal);

  std::vector<std::int64_t> in_degree(hierarchy.node_count(), 0);
  for (const Edge& e : citations.edges) ++in_degree[e.cited];

  JournalDistribution dist;
  std::map<ClusterId, std::vector<NodeId>> members;
  for (std::size_t i = 0; i < hierarchy.node_count(); ++i) {
    if (lowercase(pubs.records[i].journal) != wanted) continue;
    dist.journal_found = true;
    ++dist.publications;
    const ClusterId c = lr.final_area[i];
    if (c < 0) {
      ++dist.excluded;
      continue;
    }
    members[c].push_back(static_cast<NodeId>(i));
  }
  for (auto& [area, list] : members) {
    JournalAreaCount entry;
    entry.area = area;
    entry.area_path = lr.area_path[area];
    entry.count = static_cast<std::int64_t>(list.size());
    std::sort(list.begin(), list.end(), [&](NodeId x, NodeId y) {
      if (in_degree[x] != in_degree[y]) return in_degree[x] > in_degree[y];
      return pubs.records[x].external_id < pubs.records[y].external_id;
    });
    for (std::size_t k = 0; k < std::min(most_cited_per_area, list.size()); ++k) {
      entry.most_cited.push_back({pubs.records[list[k]].external_id, in_degree[list[k]]});
    }
    dist.areas.push_back(std::move(entry));
  }
  std::stable_sort(dist.areas.begin(), dist.areas.end(),
                   [](const JournalAreaCount& x, const JournalAreaCount& y) {
                     return x.count > y.count;
                   });
  return dist;
}

std::vector<AreaLink> area_links(const Hierarchy& hierarchy, const EdgeList& citations,
                                 int level) {
  const LevelResult& lr = checked_level(hierarchy, level);
  std::map<std::pair<ClusterId, ClusterId>, std::int64_t> counts;
  for (const Edge& e : citations.edges) {
    const ClusterId a = lr.final_area[e.citing];
    const ClusterId b = lr.final_area[e.cited];
    if (a < 0 || b < 0 || a == b) continue;
    ++counts[{std::min(a, b), std::max(a, b)}];
  }
  std::vector<AreaLink> links;
  links.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    links.push_back({lr.area_path[key.first], lr.area_path[key.second], count});
  }
  return links;
}

void write_size_distribution(const std::filesystem::path& path, const SizeDistribution& dist) {
  auto out = tsv::open_output(path);
  out << "# level=" << dist.level << " areas=" << dist.areas.size() << " total=" << dist.total
      << " min=" << dist.min << " max=" << dist.max << " mean=" << tsv::format_double(dist.mean)
      << '\n';
  out << "# log2_bins=";
  for (std::size_t b = 0; b < dist.log2_bins.size(); ++b) {
    out << (b ? "," : "") << dist.log2_bins[b];
  }
  out << '\n';
  out << "area_path\tsize\n";
  for (const auto& a : dist.areas) out << a.area_path << '\t' << a.size << '\n';
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_hot_areas(const std::filesystem::path& path, const std::vector<AreaReport>& reports) {
  auto out = tsv::open_output(path);
  out << "area_path\tsize\taverage_year\tjournals\tterms\n";
  for (const auto& r : reports) {
    out << r.area_path << '\t' << r.size << '\t' << tsv::format_double(r.average_year) << '\t';
    for (std::size_t j = 0; j < r.top_journals.size(); ++j) {
      out << (j ? "; " : "") << tsv::sanitize(r.top_journals[j].first) << " ("
          << r.top_journals[j].second << ')';
    }
    out << '\t';
    for (std::size_t t = 0; t < r.terms.size(); ++t) out << (t ? "; " : "") << r.terms[t];
    out << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_category_overlap(const std::filesystem::path& path,
                            const std::vector<CategoryShare>& shares) {
  auto out = tsv::open_output(path);
  out << "# multi-category publications counted fractionally\n";
  out << "category\tpercentage\n";
  for (const auto& s : shares) {
    out << tsv::sanitize(s.category) << '\t' << tsv::format_double(s.percentage) << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_exclusion_stats(const std::filesystem::path& path, const ExclusionStats& stats) {
  auto out = tsv::open_output(path);
  out << "# publications=" << stats.publications << " excluded=" << stats.excluded
      << " overall_percentage=" << tsv::format_double(stats.overall_percentage)
      << " no_relation_share=" << tsv::format_double(stats.no_relation_share) << '\n';
  out << "# category rows use fractional counting for multi-category publications\n";
  out << "kind\tkey\ttotal\texcluded\tpercentage\n";
  for (const auto& y : stats.per_year) {
    out << "year\t" << y.year << '\t' << y.total << '\t' << y.excluded << '\t'
        << tsv::format_double(y.percentage) << '\n';
  }
  for (const auto& c : stats.per_category) {
    out << "category\t" << tsv::sanitize(c.category) << '\t' << tsv::format_double(c.total) << '\t'
        << tsv::format_double(c.excluded) << '\t' << tsv::format_double(c.percentage) << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_journal_distribution(const std::filesystem::path& path,
                                const JournalDistribution& dist) {
  auto out = tsv::open_output(path);
  out << "# journal_found=" << (dist.journal_found ? 1 : 0) << " publications=" << dist.publications
      << " excluded=" << dist.excluded << '\n';
  out << "area_path\tcount\tmost_cited\n";
  for (const auto& a : dist.areas) {
    out << a.area_path << '\t' << a.count << '\t';
    for (std::size_t k = 0; k < a.most_cited.size(); ++k) {
      out << (k ? "; " : "") << a.most_cited[k].external_id << " (" << a.most_cited[k].citations
          << ')';
    }
    out << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_area_links(const std::filesystem::path& path, const std::vector<AreaLink>& links) {
  auto out = tsv::open_output(path);
  out << "source\ttarget\trelations\n";
  for (const auto& l : links) out << l.source << '\t' << l.target << '\t' << l.relations << '\n';
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

std::string slugify(const std::string& text) {
  std::string slug;
  bool gap = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (gap && !slug.empty()) slug += '_';
      slug += static_cast<char>(std::tolower(c));
      gap = false;
    } else {
      gap = true;
    }
  }
  return slug.empty() ? "unnamed" : slug;
}

}  // namespace stratum
