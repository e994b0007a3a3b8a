#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stratum/error.hpp"
#include "stratum/pipeline.hpp"

namespace {

void print_error(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

int default_threads() {
  if (const char* env = std::getenv("STRATUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical publication-level classification from citation data"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int> threads;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"build-graph", "Load the corpus and build the normalized relatedness graph"},
      {"cluster", "Build the multi-level classification"},
      {"label", "Label every area with its most characteristic terms"},
      {"analyze", "Write size, hot-area, overlap, exclusion and journal reports"},
      {"all", "Run build-graph, cluster, label and analyze in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "Config file (key = value lines)");
    sub->add_option("-s,--set", sets, "Override a setting, key=value")->allow_extra_args(false);
    sub->add_option("-t,--threads", threads, "Worker threads (default STRATUM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("-o,--output", output, "Output directory");
    sub->add_option("--seed", seed, "Base seed for the optimizer runs");
    sub->add_flag("-q,--quiet", quiet, "Suppress progress messages");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    std::vector<stratum::Setting> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw stratum::Error("usage", "--set expects key=value, got '" + s + "'");
      }
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (output) overrides.emplace_back("output", *output);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));

    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    stratum::PipelineConfig config = stratum::load_config(path, overrides);
    if (threads) {
      config.threads = *threads;
    } else if (!config.explicit_keys.contains("threads")) {
      config.threads = default_threads();
    }

    stratum::Logger log;
    if (!quiet) log = [](const std::string& m) { std::cerr << "stratum: " << m << '\n'; };
    stratum::run_pipeline(subcommand, config, log);
  } catch (const stratum::Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
