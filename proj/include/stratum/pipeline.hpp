#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stratum/corpus.hpp"
#include "stratum/hierarchy.hpp"
#include "stratum/labeling.hpp"

namespace stratum {

struct PipelineConfig {
  std::filesystem::path publications;
  std::filesystem::path citations;
  std::filesystem::path output = "out";
  std::optional<std::filesystem::path> stopwords;

  LoadConfig load;
  UnknownIdPolicy unknown_ids = UnknownIdPolicy::Skip;
  HierarchyParams hierarchy;
  LabelParams labels = LabelParams::defaults();

  std::size_t hot_top_n = 10;
  int overlap_level = 1;
  std::vector<std::string> journals;
  int journal_level = 1;
  bool record_timings = false;

  int threads = 1;

  // Keys given explicitly, by the config file or an override.
  std::set<std::string> explicit_keys;
};

using Setting = std::pair<std::string, std::string>;

// Built-in defaults: three levels with resolutions 8e-8, 2e-6, 5e-5, minimum
// sizes 120000, 5000, 50 and 10000, 10000, 500 optimizer runs.
PipelineConfig default_config();

// Applies one `key = value` setting; lists are comma-separated.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

// Defaults, then the config file (if any), then overrides, in that order.
// Paths in the file resolve against the file's directory. Validates the result.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path,
                           const std::vector<Setting>& overrides);

void finalize(PipelineConfig& config);

using Logger = std::function<void(const std::string&)>;

// Subcommands: build-graph, cluster, label, analyze, all. Outputs are staged
// in a temporary directory and moved into the output directory on success.
void run_pipeline(const std::string& subcommand, const PipelineConfig& config,
                  const Logger& log = {});

std::string sha256_hex(const std::filesystem::path& path);

}  // namespace stratum
