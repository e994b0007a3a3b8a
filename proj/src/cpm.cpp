#include "stratum/cpm.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "stratum/error.hpp"
#include "stratum/random.hpp"

namespace stratum {

namespace {

// Uniform read access to the two directed weighted graph types.
struct PublicationView {
  const NormalizedGraph& g;
  std::size_t node_count() const { return g.node_count(); }
  double size(std::size_t) const { return 1.0; }
  double self(std::size_t) const { return 0.0; }
  std::span<const std::uint32_t> neighbors(std::size_t u) const { return g.neighbors(u); }
  std::span<const double> weights(std::size_t u) const { return g.weights(u); }
  double weight(std::size_t u, std::size_t v) const { return g.weight(u, v); }
};

struct MetaView {
  const MetaGraph& g;
  std::size_t node_count() const { return g.node_count(); }
  double size(std::size_t u) const { return static_cast<double>(g.node_size[u]); }
  double self(std::size_t u) const { return g.self_weight[u]; }
  std::span<const std::uint32_t> neighbors(std::size_t u) const {
    return {g.neighbors.data() + g.offsets[u], g.offsets[u + 1] - g.offsets[u]};
  }
  std::span<const double> weights(std::size_t u) const {
    return {g.weights.data() + g.offsets[u], g.offsets[u + 1] - g.offsets[u]};
  }
  double weight(std::size_t u, std::size_t v) const { return g.pair_weight(u, v); }
};

void check_cover(std::size_t nodes, std::size_t assigned) {
  if (nodes != assigned) {
    throw Error("assignment_size", "assignment covers " + std::to_string(assigned) +
                                       " nodes, graph has " + std::to_string(nodes));
  }
}

std::size_t cluster_bound(std::span<const ClusterId> cluster_of) {
  ClusterId top = -1;
  for (const auto c : cluster_of) top = std::max(top, c);
  return static_cast<std::size_t>(top + 1);
}

// Counting sort of nodes by cluster; unassigned nodes are skipped.
void group_members(std::span<const ClusterId> cluster_of, std::size_t clusters,
                   std::vector<std::uint64_t>& start, std::vector<std::uint32_t>& members) {
  start.assign(clusters + 1, 0);
  for (const auto c : cluster_of) {
    if (c >= 0) ++start[static_cast<std::size_t>(c) + 1];
  }
  for (std::size_t c = 0; c < clusters; ++c) start[c + 1] += start[c];
  members.resize(start[clusters]);
  std::vector<std::uint64_t> cursor(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    if (cluster_of[i] >= 0) members[cursor[cluster_of[i]]++] = static_cast<std::uint32_t>(i);
  }
}

template <typename View>
MetaGraph coarsen_view(const View& g, std::span<const ClusterId> cluster_of) {
  check_cover(g.node_count(), cluster_of.size());
  const std::size_t k = cluster_bound(cluster_of);
  std::vector<std::uint64_t> start;
  std::vector<std::uint32_t> members;
  group_members(cluster_of, k, start, members);

  MetaGraph meta;
  meta.node_size.assign(k, 0);
  meta.self_weight.assign(k, 0.0);
  meta.offsets.assign(1, 0);
  std::vector<double> acc(k, 0.0);
  std::vector<char> seen(k, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t c = 0; c < k; ++c) {
    double size = 0.0;
    touched.clear();
    for (auto m = start[c]; m < start[c + 1]; ++m) {
      const auto i = members[m];
      size += g.size(i);
      meta.self_weight[c] += g.self(i);
      const auto nbrs = g.neighbors(i);
      const auto ws = g.weights(i);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        const auto cj = cluster_of[nbrs[e]];
        if (cj < 0) continue;
        if (static_cast<std::size_t>(cj) == c) {
          meta.self_weight[c] += ws[e];
        } else {
          if (!seen[cj]) {
            seen[cj] = 1;
            touched.push_back(static_cast<std::uint32_t>(cj));
          }
          acc[cj] += ws[e];
        }
      }
    }
    meta.node_size[c] = static_cast<std::int64_t>(size);
    std::sort(touched.begin(), touched.end());
    for (const auto v : touched) {
      meta.neighbors.push_back(v);
      meta.weights.push_back(acc[v]);
      acc[v] = 0.0;
      seen[v] = 0;
    }
    meta.offsets.push_back(meta.neighbors.size());
  }
  return meta;
}

template <typename View>
double quality_view(const View& g, std::span<const ClusterId> cluster_of, double r) {
  check_resolution(r);
  check_cover(g.node_count(), cluster_of.size());
  std::vector<double> cluster_size(cluster_bound(cluster_of), 0.0);
  double internal = 0.0;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const auto c = cluster_of[i];
    if (c < 0) continue;
    cluster_size[c] += g.size(i);
    internal += g.self(i);
    const auto nbrs = g.neighbors(i);
    const auto ws = g.weights(i);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      if (cluster_of[nbrs[e]] == c) internal += ws[e];
    }
  }
  double pairs = 0.0;
  for (const double s : cluster_size) pairs += s * s - s;
  return internal - r * pairs;
}

template <typename View>
double move_gain_view(const View& g, const Assignment& assign, NodeId node, ClusterId target,
                      double r) {
  check_resolution(r);
  check_cover(g.node_count(), assign.size());
  const ClusterId current = assign.cluster_of.at(static_cast<std::size_t>(node));
  if (target == current) return 0.0;
  const double s = g.size(static_cast<std::size_t>(node));
  // Contribution of `node` joining cluster c, excluding itself.
  const auto attach = [&](ClusterId c) {
    double total = 0.0;
    for (std::size_t j = 0; j < assign.size(); ++j) {
      if (assign.cluster_of[j] != c || j == static_cast<std::size_t>(node)) continue;
      total += g.weight(static_cast<std::size_t>(node), j) +
               g.weight(j, static_cast<std::size_t>(node)) - 2.0 * r * s * g.size(j);
    }
    return total;
  };
  return attach(target) - attach(current);
}

// Builds row-sorted undirected adjacency with e_uv = w(u,v) + w(v,u).
template <typename View>
void symmetrize(const View& g, std::vector<std::uint64_t>& offsets,
                std::vector<std::uint32_t>& neighbors, std::vector<double>& weights) {
  const std::size_t n = g.node_count();
  std::vector<std::uint64_t> t_offsets(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto v : g.neighbors(u)) ++t_offsets[v + 1];
  }
  for (std::size_t v = 0; v < n; ++v) t_offsets[v + 1] += t_offsets[v];
  std::vector<std::uint32_t> t_neighbors(t_offsets[n]);
  std::vector<double> t_weights(t_offsets[n]);
  {
    std::vector<std::uint64_t> cursor(t_offsets.begin(), t_offsets.end() - 1);
    for (std::size_t u = 0; u < n; ++u) {
      const auto nbrs = g.neighbors(u);
      const auto ws = g.weights(u);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        const auto k = cursor[nbrs[e]]++;
        t_neighbors[k] = static_cast<std::uint32_t>(u);
        t_weights[k] = ws[e];
      }
    }
  }

  offsets.assign(1, 0);
  offsets.reserve(n + 1);
  neighbors.clear();
  weights.clear();
  neighbors.reserve(t_neighbors.size());
  weights.reserve(t_neighbors.size());
  for (std::size_t u = 0; u < n; ++u) {
    const auto a = g.neighbors(u);
    const auto aw = g.weights(u);
    std::size_t x = 0;
    std::size_t y = t_offsets[u];
    const std::size_t y_end = t_offsets[u + 1];
    while (x < a.size() || y < y_end) {
      if (y == y_end || (x < a.size() && a[x] < t_neighbors[y])) {
        neighbors.push_back(a[x]);
        weights.push_back(aw[x]);
        ++x;
      } else if (x == a.size() || t_neighbors[y] < a[x]) {
        neighbors.push_back(t_neighbors[y]);
        weights.push_back(t_weights[y]);
        ++y;
      } else {
        neighbors.push_back(a[x]);
        weights.push_back(aw[x] + t_weights[y]);
        ++x;
        ++y;
      }
    }
    offsets.push_back(neighbors.size());
  }
}

// Randomized local moving: visit nodes in a seeded random order, cycling
// until every node has been visited once in a row without moving.
bool local_moving(const SymmetricNetwork& net, std::vector<ClusterId>& cluster, double r,
                  Rng& rng) {
  const std::size_t n = net.node_count();
  if (n <= 1) return false;

  std::vector<double> cluster_size(n, 0.0);
  std::vector<std::uint32_t> cluster_nodes(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster_size[cluster[i]] += net.node_size(i);
    ++cluster_nodes[cluster[i]];
  }
  std::vector<ClusterId> unused;
  for (std::size_t c = n; c-- > 0;) {
    if (cluster_nodes[c] == 0) unused.push_back(static_cast<ClusterId>(c));
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);

  std::vector<double> acc(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<ClusterId> touched;
  bool update = false;
  std::size_t stable = 0;
  std::size_t pos = 0;
  while (stable < n) {
    const std::uint32_t j = order[pos];
    const ClusterId current = cluster[j];
    const double s = net.node_size(j);

    touched.clear();
    const auto nbrs = net.neighbors(j);
    const auto ws = net.weights(j);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      const ClusterId c = cluster[nbrs[e]];
      if (!seen[c]) {
        seen[c] = 1;
        touched.push_back(c);
      }
      acc[c] += ws[e];
    }

    cluster_size[current] -= s;
    --cluster_nodes[current];
    const double stay_gain = acc[current] - 2.0 * r * s * cluster_size[current];

    ClusterId best = current;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (const ClusterId c : touched) {
      if (c == current) continue;
      const double gain = acc[c] - 2.0 * r * s * cluster_size[c];
      if (gain > best_gain || (gain == best_gain && c < best)) {
        best = c;
        best_gain = gain;
      }
    }
    for (const ClusterId c : touched) {
      acc[c] = 0.0;
      seen[c] = 0;
    }
    // Leaving for a fresh cluster; redundant when the node is now alone.
    bool to_empty = false;
    if (cluster_nodes[current] > 0 && 0.0 > best_gain) {
      best_gain = 0.0;
      to_empty = true;
    }

    ClusterId target = current;
    if (best_gain > stay_gain + kGainTolerance) {
      if (to_empty) {
        target = unused.back();
        unused.pop_back();
      } else {
        target = best;
      }
    }

    cluster_size[target] += s;
    ++cluster_nodes[target];
    if (target == current) {
      ++stable;
    } else {
      if (cluster_nodes[current] == 0) unused.push_back(current);
      cluster[j] = target;
      stable = 1;
      update = true;
    }
    pos = pos + 1 < n ? pos + 1 : 0;
  }

  std::vector<ClusterId> relabel(n, kUnassigned);
  ClusterId next = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (cluster_nodes[c] > 0) relabel[c] = next++;
  }
  for (auto& c : cluster) c = relabel[c];
  return update;
}

bool refine_level(const SymmetricNetwork& net, std::vector<ClusterId>& cluster, double r,
                  Rng& rng) {
  const std::size_t n = net.node_count();
  if (n <= 1) return false;
  bool update = local_moving(net, cluster, r, rng);
  const std::size_t k = cluster_bound(cluster);
  if (k < n) {
    const SymmetricNetwork reduced = net.aggregate(cluster, k);
    std::vector<ClusterId> reduced_cluster(k);
    std::iota(reduced_cluster.begin(), reduced_cluster.end(), 0);
    if (refine_level(reduced, reduced_cluster, r, rng)) {
      update = true;
      for (auto& c : cluster) c = reduced_cluster[c];
      local_moving(net, cluster, r, rng);
    }
  }
  return update;
}

constexpr int kMaxPasses = 100;

}  // namespace

Assignment Assignment::singletons(std::size_t n) {
  Assignment a;
  a.cluster_of.resize(n);
  std::iota(a.cluster_of.begin(), a.cluster_of.end(), 0);
  return a;
}

std::size_t Assignment::cluster_count() const { return cluster_bound(cluster_of); }

std::size_t canonicalize(std::vector<ClusterId>& cluster_of) {
  std::vector<ClusterId> relabel(cluster_bound(cluster_of), kUnassigned);
  ClusterId next = 0;
  for (auto& c : cluster_of) {
    if (c < 0) continue;
    if (relabel[c] < 0) relabel[c] = next++;
    c = relabel[c];
  }
  return static_cast<std::size_t>(next);
}

std::int64_t MetaGraph::total_size() const {
  return std::accumulate(node_size.begin(), node_size.end(), std::int64_t{0});
}

double MetaGraph::pair_weight(std::size_t u, std::size_t v) const {
  if (u == v) return self_weight[u];
  const auto begin = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
  const auto end = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(v));
  if (it == end || *it != v) return 0.0;
  return weights[static_cast<std::size_t>(it - neighbors.begin())];
}

MetaGraph as_meta_graph(const NormalizedGraph& graph) {
  MetaGraph meta;
  meta.node_size.assign(graph.node_count(), 1);
  meta.self_weight.assign(graph.node_count(), 0.0);
  meta.offsets = graph.offsets();
  meta.neighbors = graph.neighbor_array();
  meta.weights = graph.weight_array();
  return meta;
}

MetaGraph coarsen(const NormalizedGraph& graph, std::span<const ClusterId> cluster_of) {
  return coarsen_view(PublicationView{graph}, cluster_of);
}

MetaGraph coarsen(const MetaGraph& graph, std::span<const ClusterId> cluster_of) {
  return coarsen_view(MetaView{graph}, cluster_of);
}

void check_resolution(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error("invalid_resolution",
                "resolution must lie in [0, 1], got " + std::to_string(r));
  }
}

double quality(const NormalizedGraph& graph, std::span<const ClusterId> cluster_of, double r) {
  return quality_view(PublicationView{graph}, cluster_of, r);
}

double quality(const MetaGraph& graph, std::span<const ClusterId> cluster_of, double r) {
  return quality_view(MetaView{graph}, cluster_of, r);
}

double local_move_gain(const NormalizedGraph& graph, const Assignment& assign, NodeId node,
                       ClusterId target, double r) {
  return move_gain_view(PublicationView{graph}, assign, node, target, r);
}

double local_move_gain(const MetaGraph& graph, const Assignment& assign, NodeId node,
                       ClusterId target, double r) {
  return move_gain_view(MetaView{graph}, assign, node, target, r);
}

SymmetricNetwork::SymmetricNetwork(const NormalizedGraph& graph)
    : node_size_(graph.node_count(), 1.0), self_weight_(graph.node_count(), 0.0) {
  symmetrize(PublicationView{graph}, offsets_, neighbors_, weights_);
}

SymmetricNetwork::SymmetricNetwork(const MetaGraph& graph)
    : node_size_(graph.node_size.begin(), graph.node_size.end()),
      self_weight_(graph.self_weight) {
  symmetrize(MetaView{graph}, offsets_, neighbors_, weights_);
}

SymmetricNetwork SymmetricNetwork::aggregate(std::span<const ClusterId> cluster_of,
                                             std::size_t clusters) const {
  std::vector<std::uint64_t> start;
  std::vector<std::uint32_t> members;
  group_members(cluster_of, clusters, start, members);

  SymmetricNetwork out;
  out.node_size_.assign(clusters, 0.0);
  out.self_weight_.assign(clusters, 0.0);
  out.offsets_.assign(1, 0);
  std::vector<double> acc(clusters, 0.0);
  std::vector<char> seen(clusters, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t c = 0; c < clusters; ++c) {
    double internal = 0.0;
    touched.clear();
    for (auto m = start[c]; m < start[c + 1]; ++m) {
      const auto i = members[m];
      out.node_size_[c] += node_size_[i];
      out.self_weight_[c] += self_weight_[i];
      const auto nbrs = neighbors(i);
      const auto ws = weights(i);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        const auto cj = static_cast<std::uint32_t>(cluster_of[nbrs[e]]);
        if (cj == c) {
          internal += ws[e];
        } else {
          if (!seen[cj]) {
            seen[cj] = 1;
            touched.push_back(cj);
          }
          acc[cj] += ws[e];
        }
      }
    }
    // Each internal edge was seen from both endpoints.
    out.self_weight_[c] += 0.5 * internal;
    std::sort(touched.begin(), touched.end());
    for (const auto v : touched) {
      out.neighbors_.push_back(v);
      out.weights_.push_back(acc[v]);
      acc[v] = 0.0;
      seen[v] = 0;
    }
    out.offsets_.push_back(out.neighbors_.size());
  }
  return out;
}

double SymmetricNetwork::quality(std::span<const ClusterId> cluster_of, double r) const {
  check_resolution(r);
  check_cover(node_count(), cluster_of.size());
  std::vector<double> cluster_size(cluster_bound(cluster_of), 0.0);
  double internal = 0.0;
  double between = 0.0;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const auto c = cluster_of[i];
    if (c < 0) continue;
    cluster_size[c] += node_size_[i];
    internal += self_weight_[i];
    const auto nbrs = neighbors(i);
    const auto ws = weights(i);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      if (cluster_of[nbrs[e]] == c) between += ws[e];
    }
  }
  double pairs = 0.0;
  for (const double s : cluster_size) pairs += s * s - s;
  return internal + 0.5 * between - r * pairs;
}

Assignment optimize(const SymmetricNetwork& network, double r, std::uint64_t seed) {
  check_resolution(r);
  Rng rng(seed);
  Assignment result = Assignment::singletons(network.node_count());
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    if (!refine_level(network, result.cluster_of, r, rng)) break;
  }
  canonicalize(result.cluster_of);
  return result;
}

Assignment optimize(const NormalizedGraph& graph, double r, std::uint64_t seed) {
  return optimize(SymmetricNetwork(graph), r, seed);
}

Assignment optimize(const MetaGraph& graph, double r, std::uint64_t seed) {
  return optimize(SymmetricNetwork(graph), r, seed);
}

RunResult multi_run_optimize(const SymmetricNetwork& network, double r, int runs,
                             std::uint64_t base_seed, int threads) {
  check_resolution(r);
  if (runs < 1) throw Error("invalid_runs", "run count must be at least 1");
  const int workers = std::clamp(threads, 1, runs);

  struct Best {
    bool found = false;
    RunResult result;
  };
  std::vector<Best> best(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::atomic<int> next{0};

  const auto work = [&](std::size_t w) {
    try {
      for (int k = next++; k < runs; k = next++) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
        Assignment a = optimize(network, r, seed);
        const double q = network.quality(a.cluster_of, r);
        auto& b = best[w];
        if (!b.found || q > b.result.quality || (q == b.result.quality && seed < b.result.seed)) {
          b.found = true;
          b.result = RunResult{std::move(a), q, seed};
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult* winner = nullptr;
  for (auto& b : best) {
    if (!b.found) continue;
    if (winner == nullptr || b.result.quality > winner->quality ||
        (b.result.quality == winner->quality && b.result.seed < winner->seed)) {
      winner = &b.result;
    }
  }
  return std::move(*winner);
}

RunResult multi_run_optimize(const NormalizedGraph& graph, double r, int runs,
                             std::uint64_t base_seed, int threads) {
  return multi_run_optimize(SymmetricNetwork(graph), r, runs, base_seed, threads);
}

RunResult multi_run_optimize(const MetaGraph& graph, double r, int runs, std::uint64_t base_seed,
                             int threads) {
  return multi_run_optimize(SymmetricNetwork(graph), r, runs, base_seed, threads);
}

}  // namespace stratum
