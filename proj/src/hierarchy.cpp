#include "stratum/hierarchy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "stratum/error.hpp"
#include "tsv.hpp"

namespace stratum {

namespace {

std::string describe_resolutions(const std::vector<double>& r) {
  std::ostringstream os;
  for (std::size_t l = 0; l < r.size(); ++l) os << (l ? ", " : "") << r[l];
  return os.str();
}

ExclusionReason classify(const NormalizedGraph& graph, const ComponentMap& components,
                         std::int64_t finest_min_size, NodeId i) {
  if (graph.degree(static_cast<std::size_t>(i)) == 0) return ExclusionReason::NoRelations;
  if (components.component_size[components.component_id[i]] < finest_min_size) {
    return ExclusionReason::SmallComponent;
  }
  return ExclusionReason::UnreachableArea;
}

std::vector<int> parse_path(std::string_view path) {
  std::vector<int> parts;
  std::vector<std::string_view> fields;
  tsv::split(path, '.', fields);
  for (const auto f : fields) {
    const auto v = tsv::parse_number<int>(f);
    if (!v || *v < 1) throw Error("bad_area_path", "malformed area path '" + std::string(path) + "'");
    parts.push_back(*v);
  }
  return parts;
}

}  // namespace

void validate(const HierarchyParams& params) {
  const std::size_t levels = params.levels();
  if (levels == 0) throw Error("invalid_levels", "at least one level is required");
  if (params.min_size.size() != levels || params.runs.size() != levels) {
    throw Error("invalid_levels", "resolution, min_size and runs must each list " +
                                      std::to_string(levels) + " values");
  }
  for (std::size_t l = 0; l < levels; ++l) {
    const double r = params.resolution[l];
    const bool ordered = l == 0 || params.resolution[l - 1] < r;
    if (!(r >= 0.0 && r <= 1.0) || !ordered) {
      throw Error("resolution_order",
                  "resolutions must satisfy 0 <= r(1) < r(2) < ... < r(L) <= 1, got " +
                      describe_resolutions(params.resolution));
    }
    if (params.min_size[l] < 1) {
      throw Error("invalid_min_size", "minimum area size must be at least 1");
    }
    if (params.runs[l] < 1) throw Error("invalid_runs", "run count must be at least 1");
  }
}

double AreaRelatednessMatrix::at(ClusterId u, ClusterId v) const {
  const auto it = values.find({u, v});
  return it == values.end() ? 0.0 : it->second;
}

std::vector<std::int64_t> area_sizes(std::span<const ClusterId> assignment) {
  std::vector<std::int64_t> sizes;
  for (const auto c : assignment) {
    if (c < 0) continue;
    if (static_cast<std::size_t>(c) >= sizes.size()) sizes.resize(static_cast<std::size_t>(c) + 1, 0);
    ++sizes[c];
  }
  return sizes;
}

AreaRelatednessMatrix area_relatedness(const NormalizedGraph& graph,
                                       std::span<const ClusterId> prelim) {
  if (prelim.size() != graph.node_count()) {
    throw Error("assignment_size", "assignment does not cover the graph");
  }
  const auto sizes = area_sizes(prelim);
  AreaRelatednessMatrix matrix;
  for (std::size_t i = 0; i < prelim.size(); ++i) {
    const ClusterId u = prelim[i];
    if (u < 0) continue;
    const auto nbrs = graph.neighbors(i);
    const auto ws = graph.weights(i);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      const ClusterId v = prelim[nbrs[e]];
      if (v >= 0 && v != u) matrix.values[{u, v}] += ws[e];
    }
  }
  for (auto& [key, value] : matrix.values) {
    value /= static_cast<double>(sizes[key.first]) * static_cast<double>(sizes[key.second]);
  }
  return matrix;
}

std::vector<ClusterId> eligible_set(std::span<const ClusterId> prelim, std::int64_t n_min) {
  const auto sizes = area_sizes(prelim);
  std::vector<ClusterId> members;
  for (std::size_t u = 0; u < sizes.size(); ++u) {
    if (sizes[u] >= n_min && sizes[u] > 0) members.push_back(static_cast<ClusterId>(u));
  }
  return members;
}

Reassignment reassign_small_areas(const NormalizedGraph& graph, std::span<const ClusterId> prelim,
                                  std::int64_t n_min) {
  if (prelim.size() != graph.node_count()) {
    throw Error("assignment_size", "assignment does not cover the graph");
  }
  const auto sizes = area_sizes(prelim);
  const std::size_t k = sizes.size();

  Reassignment out;
  out.id_map.assign(k, kUnassigned);
  ClusterId next = 0;
  for (std::size_t u = 0; u < k; ++u) {
    if (sizes[u] > 0 && sizes[u] >= n_min) out.id_map[u] = next++;
  }

  std::vector<std::uint64_t> start(k + 1, 0);
  for (const auto c : prelim) {
    if (c >= 0) ++start[static_cast<std::size_t>(c) + 1];
  }
  for (std::size_t u = 0; u < k; ++u) start[u + 1] += start[u];
  std::vector<std::uint32_t> members(start[k]);
  {
    std::vector<std::uint64_t> cursor(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < prelim.size(); ++i) {
      if (prelim[i] >= 0) members[cursor[prelim[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  // Targets are chosen from the preliminary assignment only, so every small
  // area is resolved independently of the others.
  std::vector<ClusterId> target(k, kUnassigned);
  std::vector<double> acc(k, 0.0);
  std::vector<char> seen(k, 0);
  std::vector<ClusterId> touched;
  for (std::size_t u = 0; u < k; ++u) {
    if (sizes[u] == 0 || out.id_map[u] >= 0) continue;
    touched.clear();
    for (auto m = start[u]; m < start[u + 1]; ++m) {
      const auto i = members[m];
      const auto nbrs = graph.neighbors(i);
      const auto ws = graph.weights(i);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        const ClusterId v = prelim[nbrs[e]];
        if (v < 0 || out.id_map[v] < 0) continue;
        if (!seen[v]) {
          seen[v] = 1;
          touched.push_back(v);
        }
        acc[v] += ws[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    double best = 0.0;
    for (const ClusterId v : touched) {
      const double avg = acc[v] / (static_cast<double>(sizes[u]) * static_cast<double>(sizes[v]));
      if (avg > best) {
        best = avg;
        target[u] = v;
      }
      acc[v] = 0.0;
      seen[v] = 0;
    }
  }
  for (std::size_t u = 0; u < k; ++u) {
    if (out.id_map[u] < 0 && target[u] >= 0) out.id_map[u] = out.id_map[target[u]];
  }

  out.final_area.assign(prelim.size(), kUnassigned);
  for (std::size_t i = 0; i < prelim.size(); ++i) {
    if (prelim[i] < 0) continue;
    out.final_area[i] = out.id_map[prelim[i]];
    if (out.final_area[i] < 0) out.excluded.push_back(static_cast<NodeId>(i));
  }
  return out;
}

const char* to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::None: return "included";
    case ExclusionReason::NoRelations: return "no_relations";
    case ExclusionReason::SmallComponent: return "small_component";
    case ExclusionReason::UnreachableArea: return "unreachable_area";
  }
  return "unknown";
}

Hierarchy build_hierarchy(const NormalizedGraph& graph, const HierarchyParams& params,
                          int threads) {
  validate(params);
  const std::size_t n = graph.node_count();
  const int levels = static_cast<int>(params.levels());

  Hierarchy h;
  h.levels.resize(static_cast<std::size_t>(levels));
  h.exclusion.assign(n, ExclusionReason::None);

  std::vector<ClusterId> lower;
  for (int l = levels; l >= 1; --l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    LevelResult& level = h.levels[idx];
    level.level = l;

    std::vector<ClusterId> prelim(n, kUnassigned);
    RunResult run;
    if (l == levels) {
      const SymmetricNetwork network(graph);
      run = multi_run_optimize(network, params.resolution[idx], params.runs[idx],
                               params.base_seed, threads);
      prelim = run.assignment.cluster_of;
    } else {
      // Clustering whole lower-level areas keeps every level nested in the next.
      const SymmetricNetwork network(coarsen(graph, lower));
      run = multi_run_optimize(network, params.resolution[idx], params.runs[idx],
                               params.base_seed, threads);
      for (std::size_t i = 0; i < n; ++i) {
        if (lower[i] >= 0) prelim[i] = run.assignment.cluster_of[lower[i]];
      }
    }
    level.quality = run.quality;
    level.best_seed = run.seed;

    Reassignment re = reassign_small_areas(graph, prelim, params.min_size[idx]);
    level.preliminary = std::move(prelim);
    level.final_area = std::move(re.final_area);
    level.excluded_at_level = std::move(re.excluded);
    lower = level.final_area;
  }

  // A publication dropped at a broad level loses its finer areas too.
  for (std::size_t a = 0; a < h.levels.size(); ++a) {
    for (const NodeId i : h.levels[a].excluded_at_level) {
      for (std::size_t b = a + 1; b < h.levels.size(); ++b) h.levels[b].final_area[i] = kUnassigned;
    }
  }

  const ComponentMap components = connected_components(graph);
  const std::int64_t finest_min = params.min_size.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (h.levels.front().final_area[i] < 0) {
      h.exclusion[i] = classify(graph, components, finest_min, static_cast<NodeId>(i));
      h.excluded.push_back(static_cast<NodeId>(i));
    }
  }
  number_areas(h);
  return h;
}

void number_areas(Hierarchy& h) {
  const std::size_t n = h.node_count();
  std::vector<ClusterId> parent_of_node(n, kUnassigned);
  std::vector<std::string> parent_paths;

  for (std::size_t idx = 0; idx < h.levels.size(); ++idx) {
    LevelResult& level = h.levels[idx];
    if (level.final_area.size() != n) {
      throw Error("assignment_size", "level assignment does not cover every publication");
    }
    const std::size_t k = canonicalize(level.final_area);

    std::vector<std::int64_t> size(k, 0);
    std::vector<NodeId> first(k, -1);
    std::vector<ClusterId> parent(k, kUnassigned);
    for (std::size_t i = 0; i < n; ++i) {
      const ClusterId c = level.final_area[i];
      if (c < 0) continue;
      ++size[c];
      if (first[c] < 0) first[c] = static_cast<NodeId>(i);
      if (idx > 0) {
        const ClusterId p = parent_of_node[i];
        if (p < 0 || (parent[c] >= 0 && parent[c] != p)) {
          throw Error("nesting_violation", "area at level " + std::to_string(level.level) +
                                               " is not contained in a single parent area");
        }
        parent[c] = p;
      }
    }

    std::vector<ClusterId> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](ClusterId a, ClusterId b) {
      if (parent[a] != parent[b]) return parent[a] < parent[b];
      if (size[a] != size[b]) return size[a] > size[b];
      return first[a] < first[b];
    });
    std::vector<ClusterId> renumber(k);
    level.area_sizes.assign(k, 0);
    level.parent.assign(idx > 0 ? k : 0, kUnassigned);
    level.area_path.assign(k, {});
    int rank = 0;
    for (std::size_t pos = 0; pos < k; ++pos) {
      const ClusterId old = order[pos];
      const auto id = static_cast<ClusterId>(pos);
      renumber[old] = id;
      rank = (pos > 0 && parent[order[pos - 1]] == parent[old]) ? rank + 1 : 1;
      level.area_sizes[id] = size[old];
      if (idx > 0) {
        level.parent[id] = parent[old];
        level.area_path[id] = parent_paths[parent[old]] + "." + std::to_string(rank);
      } else {
        level.area_path[id] = std::to_string(rank);
      }
    }
    for (auto& c : level.final_area) {
      if (c >= 0) c = renumber[c];
    }
    parent_of_node = level.final_area;
    parent_paths = level.area_path;
  }
}

void write_assignment(const std::filesystem::path& path, const Hierarchy& h,
                      const PublicationTable& pubs) {
  auto out = tsv::open_output(path);
  out << "pub_id";
  for (std::size_t l = 1; l <= h.level_count(); ++l) out << "\tlevel" << l;
  out << '\n';
  for (std::size_t i = 0; i < h.node_count(); ++i) {
    if (!h.included(static_cast<NodeId>(i))) continue;
    out << pubs.records[i].external_id;
    for (const auto& level : h.levels) out << '\t' << level.area_path[level.final_area[i]];
    out << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

void write_excluded(const std::filesystem::path& path, const Hierarchy& h,
                    const PublicationTable& pubs) {
  auto out = tsv::open_output(path);
  out << "pub_id\treason\n";
  for (const NodeId i : h.excluded) {
    out << pubs.records[i].external_id << '\t' << to_string(h.exclusion[i]) << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

Hierarchy read_hierarchy(const std::filesystem::path& assignment_path,
                         const std::filesystem::path& excluded_path, const PublicationTable& pubs) {
  const std::size_t n = pubs.size();
  auto in = tsv::open_input(assignment_path);
  std::string line;
  std::vector<std::string_view> fields;
  if (!tsv::read_line(in, line)) throw Error("missing_header", assignment_path.string() + ": empty");
  tsv::split(line, '\t', fields);
  if (fields.size() < 2 || fields[0] != "pub_id") {
    throw Error("missing_header", assignment_path.string() + ": expected pub_id and level columns");
  }
  const std::size_t levels = fields.size() - 1;

  std::vector<std::vector<std::string>> path_of(levels, std::vector<std::string>(n));
  std::vector<char> assigned(n, 0);
  std::size_t line_no = 1;
  while (tsv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    tsv::split(line, '\t', fields);
    if (fields.size() != levels + 1) {
      throw Error("malformed_row", assignment_path.string() + ":" + std::to_string(line_no) +
                                       ": wrong number of fields");
    }
    const auto id = pubs.find(std::string(fields[0]));
    if (!id) {
      throw Error("unknown_id", assignment_path.string() + ":" + std::to_string(line_no) +
                                    ": unknown publication id " + std::string(fields[0]));
    }
    assigned[*id] = 1;
    for (std::size_t l = 0; l < levels; ++l) path_of[l][*id] = std::string(fields[l + 1]);
  }

  Hierarchy h;
  h.exclusion.assign(n, ExclusionReason::None);
  auto ex = tsv::open_input(excluded_path);
  tsv::read_line(ex, line);
  while (tsv::read_line(ex, line)) {
    if (line.empty()) continue;
    tsv::split(line, '\t', fields);
    const auto id = fields.empty() ? std::nullopt : pubs.find(std::string(fields[0]));
    if (!id || fields.size() < 2) {
      throw Error("unknown_id", excluded_path.string() + ": bad row '" + line + "'");
    }
    const std::string_view reason = fields[1];
    h.exclusion[*id] = reason == "no_relations"      ? ExclusionReason::NoRelations
                       : reason == "small_component" ? ExclusionReason::SmallComponent
                                                     : ExclusionReason::UnreachableArea;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool excluded = h.exclusion[i] != ExclusionReason::None;
    if (excluded == static_cast<bool>(assigned[i])) {
      throw Error("inconsistent_hierarchy", "publication " + pubs.records[i].external_id +
                                                " must appear in exactly one of the assignment "
                                                "and excluded files");
    }
    if (excluded) h.excluded.push_back(static_cast<NodeId>(i));
  }

  h.levels.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    LevelResult& level = h.levels[l];
    level.level = static_cast<int>(l + 1);
    std::vector<std::pair<std::vector<int>, std::string>> distinct;
    std::unordered_map<std::string, ClusterId> id_of;
    for (std::size_t i = 0; i < n; ++i) {
      if (!assigned[i] || id_of.contains(path_of[l][i])) continue;
      id_of.emplace(path_of[l][i], kUnassigned);
      auto parts = parse_path(path_of[l][i]);
      if (parts.size() != l + 1) {
        throw Error("bad_area_path", "area path '" + path_of[l][i] + "' has the wrong depth");
      }
      distinct.emplace_back(std::move(parts), path_of[l][i]);
    }
    std::sort(distinct.begin(), distinct.end());
    level.area_path.reserve(distinct.size());
    for (std::size_t a = 0; a < distinct.size(); ++a) {
      id_of[distinct[a].second] = static_cast<ClusterId>(a);
      level.area_path.push_back(distinct[a].second);
    }
    level.final_area.assign(n, kUnassigned);
    level.area_sizes.assign(distinct.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!assigned[i]) continue;
      const ClusterId c = id_of[path_of[l][i]];
      level.final_area[i] = c;
      ++level.area_sizes[c];
    }
    if (l > 0) {
      const LevelResult& above = h.levels[l - 1];
      level.parent.assign(distinct.size(), kUnassigned);
      for (std::size_t i = 0; i < n; ++i) {
        if (!assigned[i]) continue;
        const ClusterId c = level.final_area[i];
        const ClusterId p = above.final_area[i];
        const std::string& own = level.area_path[c];
        const std::string& up = above.area_path[p];
        if (own.compare(0, up.size() + 1, up + ".") != 0) {
          throw Error("nesting_violation", "area " + own + " is not nested in " + up);
        }
        level.parent[c] = p;
      }
    }
  }
  return h;
}

}  // namespace stratum
