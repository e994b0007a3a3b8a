#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stratum/relatedness.hpp"

namespace stratum {

using ClusterId = std::int32_t;
inline constexpr ClusterId kUnassigned = -1;

// Moves whose gain is within this distance of zero are not taken.
inline constexpr double kGainTolerance = 1e-12;

struct Assignment {
  std::vector<ClusterId> cluster_of;

  static Assignment singletons(std::size_t n);

  std::size_t size() const { return cluster_of.size(); }
  std::size_t cluster_count() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Relabels cluster ids densely in order of first appearance; kUnassigned
// entries are left alone. Returns the number of clusters.
std::size_t canonicalize(std::vector<ClusterId>& cluster_of);

// Nodes stand for groups of publications. pair weights hold
// w(u,v) = sum of a_ij over i in u, j in v for u != v (sparse, rows sorted);
// self_weight holds the same sum for u == v over pairs i != j.
struct MetaGraph {
  std::vector<std::int64_t> node_size;
  std::vector<double> self_weight;
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;

  std::size_t node_count() const { return node_size.size(); }
  std::int64_t total_size() const;
  double pair_weight(std::size_t u, std::size_t v) const;
};

MetaGraph as_meta_graph(const NormalizedGraph& graph);

// Groups nodes by cluster; nodes marked kUnassigned are dropped together with
// every pair weight that touches them.
MetaGraph coarsen(const NormalizedGraph& graph, std::span<const ClusterId> cluster_of);
MetaGraph coarsen(const MetaGraph& graph, std::span<const ClusterId> cluster_of);

// Throws Error("invalid_resolution") unless 0 <= r <= 1.
void check_resolution(double r);

// Sum over ordered pairs i != j in the same cluster of (a_ij - r), with
// nodes marked kUnassigned left out. On a MetaGraph, pairs inside one meta
// node contribute self_weight - r*s*(s-1). The textbook double sum that also
// runs over i == j differs by the constant -r * (number of publications).
double quality(const NormalizedGraph& graph, std::span<const ClusterId> cluster_of, double r);
double quality(const MetaGraph& graph, std::span<const ClusterId> cluster_of, double r);

// Change in quality when `node` moves to `target`. A target id equal to
// cluster_count() denotes a fresh empty cluster.
double local_move_gain(const NormalizedGraph& graph, const Assignment& assign, NodeId node,
                       ClusterId target, double r);
double local_move_gain(const MetaGraph& graph, const Assignment& assign, NodeId node,
                       ClusterId target, double r);

// Undirected view used by the optimizer: edge weight e_uv = w(u,v) + w(v,u).
class SymmetricNetwork {
public:
  SymmetricNetwork() = default;
  explicit SymmetricNetwork(const NormalizedGraph& graph);
  explicit SymmetricNetwork(const MetaGraph& graph);

  std::size_t node_count() const { return node_size_.size(); }
  double node_size(std::size_t u) const { return node_size_[u]; }
  double self_weight(std::size_t u) const { return self_weight_[u]; }
  std::span<const std::uint32_t> neighbors(std::size_t u) const {
    return {neighbors_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::span<const double> weights(std::size_t u) const {
    return {weights_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }

  // Collapses each cluster of a dense clustering into one node.
  SymmetricNetwork aggregate(std::span<const ClusterId> cluster_of, std::size_t clusters) const;

  double quality(std::span<const ClusterId> cluster_of, double r) const;

private:
  std::vector<double> node_size_;
  std::vector<double> self_weight_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> weights_;
};

// One seeded run: repeated randomized local moving, coarsening into a
// reduced network, recursion, and local-moving refinement after each
// uncoarsening, iterated until a full pass yields no improvement.
// The result admits no single-node move with gain above kGainTolerance.
Assignment optimize(const SymmetricNetwork& network, double r, std::uint64_t seed);
Assignment optimize(const NormalizedGraph& graph, double r, std::uint64_t seed);
Assignment optimize(const MetaGraph& graph, double r, std::uint64_t seed);

struct RunResult {
  Assignment assignment;
  double quality = 0.0;
  std::uint64_t seed = 0;
};

// Runs seeds base_seed .. base_seed+runs-1 on up to `threads` workers and
// keeps the highest quality, lowest seed on ties. The result does not depend
// on the thread count.
RunResult multi_run_optimize(const SymmetricNetwork& network, double r, int runs,
                             std::uint64_t base_seed, int threads = 1);
RunResult multi_run_optimize(const NormalizedGraph& graph, double r, int runs,
                             std::uint64_t base_seed, int threads = 1);
RunResult multi_run_optimize(const MetaGraph& graph, double r, int runs,
                             std::uint64_t base_seed, int threads = 1);

}  // namespace stratum
