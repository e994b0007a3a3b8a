#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stratum {

using NodeId = std::int32_t;

struct PublicationRecord {
  std::string external_id;
  int year = 0;
  std::string journal;
  std::string title;
  std::string abstract;
  std::vector<std::string> categories;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string external_id;
  int year = 0;
};

struct PublicationTable {
  std::vector<PublicationRecord> records;
  std::unordered_map<std::string, NodeId> index;
  // Rows dropped by the year window; they never receive a dense index.
  std::vector<RejectedRow> rejected;

  std::size_t size() const { return records.size(); }
  std::optional<NodeId> find(const std::string& external_id) const;
};

struct LoadConfig {
  std::optional<int> min_year;
  std::optional<int> max_year;
  char category_delimiter = '|';
};

PublicationTable load_publications(const std::filesystem::path& path,
                                   const LoadConfig& config = {});

// Writes the canonical TSV layout; reloading it reproduces the same indexing.
void write_publications(const std::filesystem::path& path, const PublicationTable& pubs,
                        char category_delimiter = '|');

enum class UnknownIdPolicy { Skip, Error };

struct Edge {
  NodeId citing;
  NodeId cited;
};

struct EdgeList {
  std::vector<Edge> edges;

  std::size_t rows = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t unknown_skipped = 0;
};

// Duplicate unordered pairs keep the first occurrence (and its direction).
EdgeList load_citations(const std::filesystem::path& path, const PublicationTable& pubs,
                        UnknownIdPolicy policy = UnknownIdPolicy::Skip);

// Same canonicalization as load_citations, for in-memory pairs.
EdgeList canonicalize_edges(std::vector<Edge> raw, std::size_t n);

}  // namespace stratum
