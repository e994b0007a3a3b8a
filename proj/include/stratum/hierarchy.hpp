#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stratum/corpus.hpp"
#include "stratum/cpm.hpp"
#include "stratum/relatedness.hpp"

namespace stratum {

// Per-level vectors are ordered from level 1 (broadest) to level L (finest).
struct HierarchyParams {
  std::vector<double> resolution;
  std::vector<std::int64_t> min_size;
  std::vector<int> runs;
  std::uint64_t base_seed = 0;

  std::size_t levels() const { return resolution.size(); }
};

// Rejects mismatched list lengths, non-increasing or out-of-range
// resolutions, min sizes below 1 and run counts below 1.
void validate(const HierarchyParams& params);

// Average normalized relatedness between ordered pairs of areas, keyed (u, v).
// Only pairs with at least one crossing relation are present.
struct AreaRelatednessMatrix {
  std::map<std::pair<ClusterId, ClusterId>, double> values;

  double at(ClusterId u, ClusterId v) const;
};

AreaRelatednessMatrix area_relatedness(const NormalizedGraph& graph,
                                       std::span<const ClusterId> prelim);

std::vector<std::int64_t> area_sizes(std::span<const ClusterId> assignment);

// Areas with at least n_min publications, ascending.
std::vector<ClusterId> eligible_set(std::span<const ClusterId> prelim, std::int64_t n_min);

struct Reassignment {
  std::vector<ClusterId> final_area;   // kUnassigned for excluded nodes
  std::vector<NodeId> excluded;        // newly excluded, ascending
  std::vector<ClusterId> id_map;       // preliminary id -> final id or kUnassigned
};

// Small areas move wholesale to the eligible area they relate to most
// strongly (lowest id on ties); small areas without any relation to an
// eligible area are excluded. Single pass over the preliminary assignment.
Reassignment reassign_small_areas(const NormalizedGraph& graph, std::span<const ClusterId> prelim,
                                  std::int64_t n_min);

enum class ExclusionReason : std::uint8_t { None, NoRelations, SmallComponent, UnreachableArea };

const char* to_string(ExclusionReason reason);

struct LevelResult {
  int level = 0;
  std::vector<ClusterId> preliminary;       // per publication
  std::vector<ClusterId> final_area;        // per publication, kUnassigned if excluded
  std::vector<NodeId> excluded_at_level;
  std::vector<std::int64_t> area_sizes;
  std::vector<ClusterId> parent;            // per area; empty at level 1
  std::vector<std::string> area_path;       // per area, dotted 1-based path
  double quality = 0.0;                     // flat quality of the preliminary assignment
  std::uint64_t best_seed = 0;

  std::size_t area_count() const { return area_sizes.size(); }
};

struct Hierarchy {
  std::vector<LevelResult> levels;
  std::vector<ExclusionReason> exclusion;   // per publication
  std::vector<NodeId> excluded;             // ascending

  std::size_t level_count() const { return levels.size(); }
  std::size_t node_count() const { return exclusion.size(); }
  bool included(NodeId i) const { return exclusion[i] == ExclusionReason::None; }
  const LevelResult& level(int l) const { return levels.at(static_cast<std::size_t>(l - 1)); }
  std::size_t included_count() const { return node_count() - excluded.size(); }
};

Hierarchy build_hierarchy(const NormalizedGraph& graph, const HierarchyParams& params,
                          int threads = 1);

// Renumbers areas canonically: level-1 areas by size descending, children by
// size descending within their parent, ties by lowest member index; fills
// parent and area_path.
void number_areas(Hierarchy& hierarchy);

// assignment.tsv: pub_id then one dotted area path per level, included
// publications only. excluded.tsv: pub_id, reason.
void write_assignment(const std::filesystem::path& path, const Hierarchy& hierarchy,
                      const PublicationTable& pubs);
void write_excluded(const std::filesystem::path& path, const Hierarchy& hierarchy,
                    const PublicationTable& pubs);
Hierarchy read_hierarchy(const std::filesystem::path& assignment_path,
                         const std::filesystem::path& excluded_path, const PublicationTable& pubs);

}  // namespace stratum
