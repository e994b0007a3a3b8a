#include "stratum/corpus.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "stratum/error.hpp"
#include "tsv.hpp"

namespace stratum {

namespace {

constexpr std::array<std::string_view, 6> kColumns = {"id",       "year",     "journal",
                                                      "title",    "abstract", "categories"};

std::string at_line(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

}  // namespace

std::optional<NodeId> PublicationTable::find(const std::string& external_id) const {
  const auto it = index.find(external_id);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

PublicationTable load_publications(const std::filesystem::path& path, const LoadConfig& config) {
  auto in = tsv::open_input(path);
  std::string line;
  if (!tsv::read_line(in, line)) {
    throw Error("missing_header", path.string() + ": empty file, expected a header row");
  }

  std::vector<std::string_view> fields;
  tsv::split(line, '\t', fields);
  std::array<int, kColumns.size()> column{};
  column.fill(-1);
  for (std::size_t f = 0; f < fields.size(); ++f) {
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (fields[f] == kColumns[c]) column[c] = static_cast<int>(f);
    }
  }
  if (column[0] < 0 || column[1] < 0) {
    throw Error("missing_column", path.string() + ": header must name the columns id and year");
  }
  const int required = std::max(column[0], column[1]);

  PublicationTable table;
  std::size_t line_no = 1;
  while (tsv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    tsv::split(line, '\t', fields);
    if (static_cast<int>(fields.size()) <= required) {
      throw Error("malformed_row", at_line(path, line_no) + ": expected at least " +
                                       std::to_string(required + 1) + " fields");
    }
    const auto field = [&](std::size_t c) -> std::string_view {
      const int f = column[c];
      return (f >= 0 && f < static_cast<int>(fields.size())) ? fields[f] : std::string_view{};
    };

    PublicationRecord record;
    record.external_id = std::string(field(0));
    if (record.external_id.empty()) {
      throw Error("empty_id", at_line(path, line_no) + ": empty publication id");
    }
    const auto year = tsv::parse_number<int>(field(1));
    if (!year) {
      throw Error("bad_year", at_line(path, line_no) + ": unparseable year '" +
                                  std::string(field(1)) + "' for " + record.external_id);
    }
    record.year = *year;

    if (table.index.contains(record.external_id)) {
      throw Error("duplicate_id", at_line(path, line_no) + ": duplicate publication id " +
                                      record.external_id);
    }
    if ((config.min_year && record.year < *config.min_year) ||
        (config.max_year && record.year > *config.max_year)) {
      table.rejected.push_back({line_no, record.external_id, record.year});
      // Still reserve the id so a later duplicate is reported.
      table.index.emplace(record.external_id, -1);
      continue;
    }

    record.journal = std::string(field(2));
    record.title = std::string(field(3));
    record.abstract = std::string(field(4));
    const std::string_view categories = field(5);
    if (!categories.empty()) {
      std::vector<std::string_view> parts;
      tsv::split(categories, config.category_delimiter, parts);
      for (const auto part : parts) {
        if (!part.empty()) record.categories.emplace_back(part);
      }
    }
    table.index.emplace(record.external_id, static_cast<NodeId>(table.records.size()));
    table.records.push_back(std::move(record));
  }

  std::erase_if(table.index, [](const auto& entry) { return entry.second < 0; });
  return table;
}

void write_publications(const std::filesystem::path& path, const PublicationTable& pubs,
                        char category_delimiter) {
  auto out = tsv::open_output(path);
  out << "id\tyear\tjournal\ttitle\tabstract\tcategories\n";
  for (const auto& r : pubs.records) {
    std::string categories;
    for (std::size_t k = 0; k < r.categories.size(); ++k) {
      if (k > 0) categories += category_delimiter;
      categories += tsv::sanitize(r.categories[k]);
    }
    out << tsv::sanitize(r.external_id) << '\t' << r.year << '\t' << tsv::sanitize(r.journal)
        << '\t' << tsv::sanitize(r.title) << '\t' << tsv::sanitize(r.abstract) << '\t'
        << categories << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

EdgeList canonicalize_edges(std::vector<Edge> raw, std::size_t n) {
  EdgeList list;
  list.rows = raw.size();

  std::vector<Edge> kept;
  kept.reserve(raw.size());
  for (const Edge& e : raw) {
    if (e.citing < 0 || e.cited < 0 || static_cast<std::size_t>(e.citing) >= n ||
        static_cast<std::size_t>(e.cited) >= n) {
      throw Error("index_out_of_range", "edge endpoint outside 0.." + std::to_string(n));
    }
    if (e.citing == e.cited) {
      ++list.self_loops_dropped;
    } else {
      kept.push_back(e);
    }
  }
  raw.clear();
  raw.shrink_to_fit();

  // Sort positions by unordered pair, keep the first occurrence of each pair,
  // then restore input order.
  const auto key = [&](std::uint32_t k) {
    const auto a = static_cast<std::uint64_t>(std::min(kept[k].citing, kept[k].cited));
    const auto b = static_cast<std::uint64_t>(std::max(kept[k].citing, kept[k].cited));
    return (a << 32) | b;
  };
  std::vector<std::uint32_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    const auto kx = key(x);
    const auto ky = key(y);
    return kx != ky ? kx < ky : x < y;
  });
  std::vector<std::uint32_t> first;
  first.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || key(order[k]) != key(order[k - 1])) first.push_back(order[k]);
  }
  order.clear();
  order.shrink_to_fit();
  std::sort(first.begin(), first.end());

  list.duplicates_dropped = kept.size() - first.size();
  list.edges.reserve(first.size());
  for (const auto k : first) list.edges.push_back(kept[k]);
  return list;
}

EdgeList load_citations(const std::filesystem::path& path, const PublicationTable& pubs,
                        UnknownIdPolicy policy) {
  auto in = tsv::open_input(path);
  std::string line;
  std::vector<std::string_view> fields;
  std::vector<Edge> raw;
  std::size_t unknown = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (tsv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    tsv::split(line, '\t', fields);
    if (first) {
      first = false;
      if (fields[0] == "citing_id") continue;
    }
    if (fields.size() < 2) {
      throw Error("malformed_row", at_line(path, line_no) + ": expected citing_id and cited_id");
    }
    const auto citing = pubs.index.find(std::string(fields[0]));
    const auto cited = pubs.index.find(std::string(fields[1]));
    if (citing == pubs.index.end() || cited == pubs.index.end()) {
      if (policy == UnknownIdPolicy::Error) {
        const auto missing = citing == pubs.index.end() ? fields[0] : fields[1];
        throw Error("unknown_id", at_line(path, line_no) + ": unknown publication id " +
                                      std::string(missing));
      }
      ++unknown;
      continue;
    }
    raw.push_back({citing->second, cited->second});
  }

  EdgeList list = canonicalize_edges(std::move(raw), pubs.size());
  list.rows += unknown;
  list.unknown_skipped = unknown;
  return list;
}

}  // namespace stratum
