#include "stratum/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "stratum/analysis.hpp"
#include "stratum/error.hpp"
#include "stratum/relatedness.hpp"
#include "tsv.hpp"

namespace stratum {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kStaging = ".staging";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::vector<std::string_view> parts;
  tsv::split(value, ',', parts);
  for (const auto p : parts) {
    auto item = trim(p);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error("config_error", "invalid value '" + value + "' for " + key);
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  const auto parsed = tsv::parse_number<T>(trim(value));
  if (!parsed) bad_value(key, value);
  return *parsed;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_value<T>(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, value);
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(trim(value));
  return ((p.is_relative() && !base.empty()) ? base / p : p).lexically_normal();
}

std::vector<std::int64_t> default_runs(std::size_t levels) {
  if (levels == 0) return {};
  std::vector<std::int64_t> runs(levels, 10000);
  runs.back() = 500;
  return runs;
}

json config_json(const PipelineConfig& c) {
  json j;
  j["publications"] = c.publications.generic_string();
  j["citations"] = c.citations.generic_string();
  j["stopwords"] = c.stopwords ? c.stopwords->generic_string() : "";
  j["levels"] = c.hierarchy.levels();
  j["resolution"] = c.hierarchy.resolution;
  j["min_size"] = c.hierarchy.min_size;
  j["runs"] = c.hierarchy.runs;
  j["seed"] = c.hierarchy.base_seed;
  j["unknown_ids"] = c.unknown_ids == UnknownIdPolicy::Skip ? "skip" : "error";
  j["min_year"] = c.load.min_year ? json(*c.load.min_year) : json(nullptr);
  j["max_year"] = c.load.max_year ? json(*c.load.max_year) : json(nullptr);
  j["label_m"] = c.labels.m;
  j["label_top_k"] = c.labels.top_k;
  j["label_dedup_threshold"] = c.labels.dedup_threshold;
  j["label_min_term_len"] = c.labels.min_term_len;
  j["label_max_ngram"] = c.labels.max_ngram;
  j["hot_top_n"] = c.hot_top_n;
  j["overlap_level"] = c.overlap_level;
  j["journals"] = c.journals;
  j["journal_level"] = c.journal_level;
  return j;
}

// Files for one subcommand go to a staging directory first and are moved
// into the output directory only after the subcommand succeeded.
class Staging {
public:
  explicit Staging(const fs::path& output) : output_(output), dir_(output / kStaging) {
    fs::create_directories(output_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  fs::path file(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }

  void promote() {
    for (const auto& name : names_) fs::rename(dir_ / name, output_ / name);
    names_.clear();
  }

private:
  fs::path output_;
  fs::path dir_;
  std::vector<std::string> names_;
};

json read_manifest(const fs::path& output) {
  const fs::path path = output / kManifest;
  if (!fs::exists(path)) return json::object();
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return json::object();
  }
}

void write_manifest(const fs::path& output, json manifest, const PipelineConfig& config) {
  manifest["config"] = config_json(config);
  json files = json::object();
  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(output)) {
    if (entry.is_regular_file() && entry.path().filename() != kManifest) {
      entries.push_back(entry.path());
    }
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) files[p.filename().string()] = sha256_hex(p);
  manifest["files"] = files;

  const fs::path tmp = output / (std::string(kManifest) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("io_error", "failed writing " + tmp.string());
  }
  fs::rename(tmp, output / kManifest);
}

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fixed(double value, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << value;
  return os.str();
}

struct Context {
  const PipelineConfig& config;
  const Logger& log;
  json manifest;

  void info(const std::string& message) const {
    if (log) log(message);
  }
  void timing(const std::string& step, double seconds) {
    info(step + " took " + fixed(seconds, 2) + "s");
    if (config.record_timings) manifest["timings"][step] = seconds;
  }
};

PublicationTable load_corpus(Context& ctx) {
  PublicationTable pubs = load_publications(ctx.config.publications, ctx.config.load);
  ctx.info("loaded " + std::to_string(pubs.size()) + " publications (" +
           std::to_string(pubs.rejected.size()) + " outside the year window)");
  return pubs;
}

EdgeList load_edges(Context& ctx, const PublicationTable& pubs) {
  EdgeList edges = load_citations(ctx.config.citations, pubs, ctx.config.unknown_ids);
  ctx.info("loaded " + std::to_string(edges.edges.size()) + " citation relations from " +
           std::to_string(edges.rows) + " rows");
  return edges;
}

void run_build_graph(Context& ctx) {
  Timer timer;
  const PublicationTable pubs = load_corpus(ctx);
  const EdgeList edges = load_edges(ctx, pubs);
  const NormalizedGraph graph = build_relatedness(edges, pubs.size());

  std::size_t isolated = 0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) isolated += graph.degree(i) == 0;
  const ComponentMap components = connected_components(graph);
  const auto largest = components.component_size.empty()
                           ? std::int64_t{0}
                           : *std::max_element(components.component_size.begin(),
                                               components.component_size.end());

  Staging staging(ctx.config.output);
  save_graph(staging.file("graph.bin"), graph);
  staging.promote();

  json corpus;
  corpus["publications"] = pubs.size();
  corpus["rejected_by_year"] = pubs.rejected.size();
  corpus["citation_rows"] = edges.rows;
  corpus["relations"] = edges.edges.size();
  corpus["duplicates_dropped"] = edges.duplicates_dropped;
  corpus["self_loops_dropped"] = edges.self_loops_dropped;
  corpus["unknown_skipped"] = edges.unknown_skipped;
  corpus["isolated_publications"] = isolated;
  corpus["components"] = components.component_size.size();
  corpus["largest_component"] = largest;
  ctx.manifest["corpus"] = corpus;
  ctx.timing("build-graph", timer.seconds());
}

NormalizedGraph graph_for(Context& ctx, const PublicationTable& pubs) {
  const fs::path cache = ctx.config.output / "graph.bin";
  if (fs::exists(cache)) {
    NormalizedGraph graph = load_graph(cache);
    if (graph.node_count() == pubs.size()) {
      ctx.info("using cached graph " + cache.string());
      return graph;
    }
    ctx.info("cached graph size does not match the corpus; rebuilding");
  }
  return build_relatedness(load_edges(ctx, pubs), pubs.size());
}

void run_cluster(Context& ctx) {
  Timer timer;
  const PublicationTable pubs = load_corpus(ctx);
  const NormalizedGraph graph = graph_for(ctx, pubs);
  const HierarchyParams& params = ctx.config.hierarchy;
  const Hierarchy h = build_hierarchy(graph, params, ctx.config.threads);

  json levels = json::array();
  for (const auto& level : h.levels) {
    const auto idx = static_cast<std::size_t>(level.level - 1);
    json entry;
    entry["level"] = level.level;
    entry["resolution"] = params.resolution[idx];
    entry["min_size"] = params.min_size[idx];
    entry["runs"] = params.runs[idx];
    entry["seeds"] = {params.base_seed,
                      params.base_seed + static_cast<std::uint64_t>(params.runs[idx]) - 1};
    entry["best_seed"] = level.best_seed;
    entry["quality"] = level.quality;
    entry["areas"] = level.area_count();
    entry["excluded_at_level"] = level.excluded_at_level.size();
    levels.push_back(entry);
    ctx.info("level " + std::to_string(level.level) + ": " + std::to_string(level.area_count()) +
             " areas, best seed " + std::to_string(level.best_seed) + ", quality " +
             tsv::format_double(level.quality));
  }
  ctx.manifest["levels"] = levels;
  ctx.manifest["excluded"] = h.excluded.size();
  ctx.manifest["included"] = h.included_count();

  Staging staging(ctx.config.output);
  write_assignment(staging.file("assignment.tsv"), h, pubs);
  write_excluded(staging.file("excluded.tsv"), h, pubs);
  staging.promote();
  ctx.timing("cluster", timer.seconds());
}

Hierarchy load_hierarchy(const Context& ctx, const PublicationTable& pubs) {
  const fs::path assignment = ctx.config.output / "assignment.tsv";
  const fs::path excluded = ctx.config.output / "excluded.tsv";
  if (!fs::exists(assignment) || !fs::exists(excluded)) {
    throw Error("missing_input", "no clustering in " + ctx.config.output.string() +
                                     "; run the cluster subcommand first");
  }
  return read_hierarchy(assignment, excluded, pubs);
}

void run_label(Context& ctx) {
  Timer timer;
  const PublicationTable pubs = load_corpus(ctx);
  const Hierarchy h = load_hierarchy(ctx, pubs);
  LabelParams params = ctx.config.labels;
  if (ctx.config.stopwords) params.stopwords = load_stopwords(*ctx.config.stopwords);
  const NgramTermExtractor extractor(params);
  const auto labels = label_hierarchy(h, pubs, params, extractor);

  Staging staging(ctx.config.output);
  write_labels(staging.file("labels.tsv"), labels);
  staging.promote();
  ctx.manifest["labeled_areas"] = labels.size();
  ctx.timing("label", timer.seconds());
}

void run_analyze(Context& ctx) {
  Timer timer;
  const PipelineConfig& config = ctx.config;
  const PublicationTable pubs = load_corpus(ctx);
  const Hierarchy h = load_hierarchy(ctx, pubs);
  const EdgeList edges = load_edges(ctx, pubs);
  std::vector<AreaLabelSet> labels;
  if (fs::exists(config.output / "labels.tsv")) labels = read_labels(config.output / "labels.tsv");

  Staging staging(config.output);
  for (int level = 1; level <= static_cast<int>(h.level_count()); ++level) {
    const std::string suffix = "_L" + std::to_string(level) + ".tsv";
    write_size_distribution(staging.file("sizes" + suffix), size_distribution(h, level));
    const auto hot = hot_areas(h, pubs, level, config.hot_top_n, labels);
    write_hot_areas(staging.file("hot" + suffix), hot);
    write_area_links(staging.file("area_links" + suffix), area_links(h, edges, level));
    for (std::size_t k = 0; k < std::min<std::size_t>(3, hot.size()); ++k) {
      ctx.info("level " + std::to_string(level) + " hot area " + hot[k].area_path + ": " +
               std::to_string(hot[k].size) + " publications, average year " +
               fixed(hot[k].average_year, 1));
    }
  }

  const bool any_categories = std::any_of(pubs.records.begin(), pubs.records.end(),
                                          [](const auto& r) { return !r.categories.empty(); });
  if (any_categories && config.overlap_level <= static_cast<int>(h.level_count())) {
    const LevelResult& level = h.level(config.overlap_level);
    for (std::size_t a = 0; a < level.area_count(); ++a) {
      write_category_overlap(staging.file("overlap_" + level.area_path[a] + ".tsv"),
                             category_overlap(h, pubs, config.overlap_level,
                                              static_cast<ClusterId>(a)));
    }
  }

  write_exclusion_stats(staging.file("exclusions.tsv"), exclusion_stats(h, pubs));

  for (const auto& journal : config.journals) {
    const auto dist = journal_distribution(h, pubs, edges, journal, config.journal_level);
    if (!dist.journal_found) ctx.info("warning: journal '" + journal + "' not found in corpus");
    write_journal_distribution(staging.file("journal_" + slugify(journal) + ".tsv"), dist);
  }
  staging.promote();
  ctx.timing("analyze", timer.seconds());
}

}  // namespace

PipelineConfig default_config() {
  PipelineConfig c;
  c.hierarchy.resolution = {8e-8, 2e-6, 5e-5};
  c.hierarchy.min_size = {120000, 5000, 50};
  c.hierarchy.runs = {10000, 10000, 500};
  c.hierarchy.base_seed = 1;
  return c;
}

void apply_setting(PipelineConfig& c, const std::string& raw_key, const std::string& value,
                   const fs::path& base_dir) {
  const std::string key = trim(raw_key);
  if (key == "publications") {
    c.publications = resolve(base_dir, value);
  } else if (key == "citations") {
    c.citations = resolve(base_dir, value);
  } else if (key == "output") {
    c.output = resolve(base_dir, value);
  } else if (key == "stopwords") {
    const auto v = trim(value);
    c.stopwords = v.empty() ? std::nullopt : std::optional<fs::path>(resolve(base_dir, v));
  } else if (key == "levels") {
    const auto levels = parse_value<int>(key, value);
    if (levels < 1) bad_value(key, value);
    c.explicit_keys.insert(key);
    if (!c.explicit_keys.contains("runs")) {
      const auto runs = default_runs(static_cast<std::size_t>(levels));
      c.hierarchy.runs.assign(runs.begin(), runs.end());
    }
  } else if (key == "resolution") {
    c.hierarchy.resolution = parse_list<double>(key, value);
  } else if (key == "min_size") {
    c.hierarchy.min_size = parse_list<std::int64_t>(key, value);
  } else if (key == "runs") {
    c.hierarchy.runs = parse_list<int>(key, value);
  } else if (key == "seed") {
    c.hierarchy.base_seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "unknown_ids") {
    const auto v = trim(value);
    if (v == "skip") {
      c.unknown_ids = UnknownIdPolicy::Skip;
    } else if (v == "error") {
      c.unknown_ids = UnknownIdPolicy::Error;
    } else {
      bad_value(key, value);
    }
  } else if (key == "min_year") {
    c.load.min_year = parse_value<int>(key, value);
  } else if (key == "max_year") {
    c.load.max_year = parse_value<int>(key, value);
  } else if (key == "category_delimiter") {
    const auto v = trim(value);
    if (v.size() != 1) bad_value(key, value);
    c.load.category_delimiter = v[0];
  } else if (key == "label_m") {
    c.labels.m = parse_value<double>(key, value);
  } else if (key == "label_top_k") {
    c.labels.top_k = parse_value<int>(key, value);
  } else if (key == "label_dedup_threshold") {
    c.labels.dedup_threshold = parse_value<double>(key, value);
  } else if (key == "label_min_term_len") {
    c.labels.min_term_len = parse_value<int>(key, value);
  } else if (key == "label_max_ngram") {
    c.labels.max_ngram = parse_value<int>(key, value);
  } else if (key == "hot_top_n") {
    c.hot_top_n = parse_value<std::size_t>(key, value);
  } else if (key == "overlap_level") {
    c.overlap_level = parse_value<int>(key, value);
  } else if (key == "journals") {
    c.journals = split_list(value);
  } else if (key == "journal_level") {
    c.journal_level = parse_value<int>(key, value);
  } else if (key == "timings") {
    c.record_timings = parse_bool(key, value);
  } else if (key == "threads") {
    c.threads = parse_value<int>(key, value);
  } else {
    throw Error("config_error", "unknown setting '" + key + "'");
  }
  c.explicit_keys.insert(key);
}

void finalize(PipelineConfig& c) {
  if (c.explicit_keys.contains("levels")) {
    // levels only sizes the run list; the other lists must match it.
    const auto runs = c.hierarchy.runs.size();
    if (c.hierarchy.resolution.size() != runs || c.hierarchy.min_size.size() != runs) {
      throw Error("invalid_levels", "resolution, min_size and runs must each list " +
                                        std::to_string(runs) + " values");
    }
  }
  validate(c.hierarchy);
  validate(c.labels);
  if (c.hot_top_n < 1) throw Error("config_error", "hot_top_n must be at least 1");
  if (c.threads < 1) throw Error("config_error", "threads must be at least 1");
  const auto levels = static_cast<int>(c.hierarchy.levels());
  if (c.overlap_level < 1 || c.overlap_level > levels || c.journal_level < 1 ||
      c.journal_level > levels) {
    throw Error("config_error", "analysis levels must lie in 1.." + std::to_string(levels));
  }
}

PipelineConfig load_config(const std::optional<fs::path>& path,
                           const std::vector<Setting>& overrides) {
  PipelineConfig config = default_config();
  if (path) {
    auto in = tsv::open_input(*path);
    const fs::path base = path->parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (tsv::read_line(in, line)) {
      ++line_no;
      const auto text = trim(line);
      if (text.empty() || text[0] == '#') continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw Error("config_error", path->string() + ":" + std::to_string(line_no) +
                                        ": expected key = value");
      }
      apply_setting(config, text.substr(0, eq), text.substr(eq + 1), base);
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  finalize(config);
  return config;
}

void run_pipeline(const std::string& subcommand, const PipelineConfig& config, const Logger& log) {
  static const std::vector<std::string> known = {"build-graph", "cluster", "label", "analyze",
                                                 "all"};
  if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
    throw Error("unknown_subcommand", "unknown subcommand '" + subcommand + "'");
  }
  if ((subcommand == "build-graph" || subcommand == "all" || subcommand == "analyze") &&
      config.citations.empty()) {
    throw Error("config_error", "citations path is not set");
  }
  if (config.publications.empty()) throw Error("config_error", "publications path is not set");

  fs::create_directories(config.output);
  Context ctx{config, log, read_manifest(config.output)};
  ctx.manifest.erase("timings");
  const bool all = subcommand == "all";
  if (all || subcommand == "build-graph") run_build_graph(ctx);
  if (all || subcommand == "cluster") run_cluster(ctx);
  if (all || subcommand == "label") run_label(ctx);
  if (all || subcommand == "analyze") run_analyze(ctx);
  write_manifest(config.output, ctx.manifest, config);
}

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    EVP_DigestUpdate(md, buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(md, digest, &length);
  EVP_MD_CTX_free(md);
  std::ostringstream os;
  for (unsigned int k = 0; k < length; ++k) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return os.str();
}

}  // namespace stratum
