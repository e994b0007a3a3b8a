#include "stratum/relatedness.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "stratum/error.hpp"

namespace stratum {

static_assert(std::endian::native == std::endian::little,
              "graph cache layout assumes a little-endian host");

NormalizedGraph::NormalizedGraph(std::vector<std::uint64_t> offsets,
                                 std::vector<std::uint32_t> neighbors, std::vector<double> weights)
    : offsets_(std::move(offsets)), neighbors_(std::move(neighbors)), weights_(std::move(weights)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != neighbors_.size() ||
      neighbors_.size() != weights_.size() || !std::is_sorted(offsets_.begin(), offsets_.end())) {
    throw Error("corrupt_graph", "inconsistent compressed adjacency arrays");
  }
}

double NormalizedGraph::weight(std::size_t i, std::size_t j) const {
  const auto row = neighbors(i);
  const auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(j));
  if (it == row.end() || *it != j) return 0.0;
  return weights_[offsets_[i] + static_cast<std::size_t>(it - row.begin())];
}

NormalizedGraph build_relatedness(const EdgeList& edges, std::size_t n) {
  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (const Edge& e : edges.edges) {
    if (e.citing == e.cited || static_cast<std::size_t>(e.citing) >= n ||
        static_cast<std::size_t>(e.cited) >= n) {
      throw Error("invalid_edge", "edge list is not canonical");
    }
    ++offsets[e.citing + 1];
    ++offsets[e.cited + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  std::vector<std::uint32_t> neighbors(offsets[n]);
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Edge& e : edges.edges) {
    neighbors[cursor[e.citing]++] = static_cast<std::uint32_t>(e.cited);
    neighbors[cursor[e.cited]++] = static_cast<std::uint32_t>(e.citing);
  }
  cursor.clear();
  cursor.shrink_to_fit();

  std::vector<double> weights(offsets[n]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto begin = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    const auto end = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    std::sort(begin, end);
    if (std::adjacent_find(begin, end) != end) {
      throw Error("invalid_edge", "edge list contains a duplicate pair");
    }
    const auto degree = offsets[i + 1] - offsets[i];
    std::fill(weights.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
              weights.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]),
              degree > 0 ? 1.0 / static_cast<double>(degree) : 0.0);
  }
  return NormalizedGraph(std::move(offsets), std::move(neighbors), std::move(weights));
}

ComponentMap connected_components(const NormalizedGraph& graph) {
  const std::size_t n = graph.node_count();
  ComponentMap map;
  map.component_id.assign(n, -1);
  std::vector<std::uint32_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (map.component_id[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(map.component_size.size());
    std::int64_t size = 0;
    map.component_id[start] = id;
    stack.push_back(static_cast<std::uint32_t>(start));
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      ++size;
      for (const auto v : graph.neighbors(u)) {
        if (map.component_id[v] < 0) {
          map.component_id[v] = id;
          stack.push_back(v);
        }
      }
    }
    map.component_size.push_back(size);
  }
  return map;
}

namespace {

constexpr char kMagic[4] = {'N', 'G', 'R', '1'};

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <typename T>
void read_array(std::ifstream& in, std::vector<T>& values, std::size_t count) {
  values.resize(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(T)));
}

}  // namespace

void save_graph(const std::filesystem::path& path, const NormalizedGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t n = graph.node_count();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  write_array(out, graph.offsets());
  write_array(out, graph.neighbor_array());
  write_array(out, graph.weight_array());
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

NormalizedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("corrupt_graph", path.string() + ": not a graph cache");
  }
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  const auto file_size = std::filesystem::file_size(path);
  if (!in || n > file_size / sizeof(std::uint64_t)) {
    throw Error("corrupt_graph", path.string() + ": truncated header");
  }
  std::vector<std::uint64_t> offsets;
  read_array(in, offsets, n + 1);
  if (!in || offsets.back() > file_size) {
    throw Error("corrupt_graph", path.string() + ": truncated offsets");
  }
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;
  read_array(in, neighbors, offsets.back());
  read_array(in, weights, offsets.back());
  if (!in) throw Error("corrupt_graph", path.string() + ": truncated adjacency");
  return NormalizedGraph(std::move(offsets), std::move(neighbors), std::move(weights));
}

}  // namespace stratum
