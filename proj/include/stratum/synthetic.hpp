#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stratum/corpus.hpp"

namespace stratum {

// Planted nested partition: node i belongs to group i / group_size[l] at each
// level, group_size ordered broadest first and each a multiple of the next.
// Every edge picks the level whose group it stays in with the matching
// probability in level_fraction; the remaining probability links anywhere.
struct PlantedSpec {
  std::size_t nodes = 0;
  std::vector<std::size_t> group_size;
  std::vector<double> level_fraction;
  double average_degree = 10.0;
  // Appended after the planted nodes.
  std::size_t isolated = 0;
  std::size_t small_components = 0;
  std::size_t small_component_size = 0;
  std::uint64_t seed = 1;

  std::size_t total_nodes() const {
    return nodes + isolated + small_components * small_component_size;
  }
};

// Raw citing/cited pairs; may contain duplicate pairs but no self loops.
std::vector<Edge> planted_edges(const PlantedSpec& spec);

// Titles, abstracts, journals, years and categories that follow the planted
// groups: every finest group has its own topic word, every middle group its
// own journal and categories.
PublicationTable planted_publications(const PlantedSpec& spec);

// A deterministic pronounceable word for a group id, distinct per id.
std::string topic_word(std::size_t id, std::size_t salt = 0);

// Writes publications.tsv and citations.tsv into dir.
void write_planted_corpus(const std::filesystem::path& dir, const PlantedSpec& spec);

}  // namespace stratum
