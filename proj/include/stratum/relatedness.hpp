#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stratum/corpus.hpp"

namespace stratum {

// Row-normalized direct-citation relatedness in compressed sparse row form.
// Row i holds a_ij = 1/degree(i) for every publication j related to i by a
// citation in either direction. Isolated publications have empty rows.
class NormalizedGraph {
public:
  NormalizedGraph() = default;
  NormalizedGraph(std::vector<std::uint64_t> offsets, std::vector<std::uint32_t> neighbors,
                  std::vector<double> weights);

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t entry_count() const { return neighbors_.size(); }

  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], degree(i)};
  }
  std::span<const double> weights(std::size_t i) const {
    return {weights_.data() + offsets_[i], degree(i)};
  }

  // a_ij, zero when i and j are unrelated. Binary search over row i.
  double weight(std::size_t i, std::size_t j) const;

  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  const std::vector<std::uint32_t>& neighbor_array() const { return neighbors_; }
  const std::vector<double>& weight_array() const { return weights_; }

  friend bool operator==(const NormalizedGraph&, const NormalizedGraph&) = default;

private:
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> weights_;
};

NormalizedGraph build_relatedness(const EdgeList& edges, std::size_t n);

struct ComponentMap {
  std::vector<std::int32_t> component_id;
  std::vector<std::int64_t> component_size;
};

// Component ids are numbered in order of their lowest member.
ComponentMap connected_components(const NormalizedGraph& graph);

// Binary cache: "NGR1", u64 n, u64 offsets[n+1], u32 neighbors[m], f64 weights[m],
// all little-endian.
void save_graph(const std::filesystem::path& path, const NormalizedGraph& graph);
NormalizedGraph load_graph(const std::filesystem::path& path);

}  // namespace stratum
