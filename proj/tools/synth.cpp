#include <iostream>

#include "CLI11.hpp"
#include "stratum/error.hpp"
#include "stratum/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic planted-partition corpus (publications.tsv, citations.tsv)"};
  stratum::PlantedSpec spec;
  spec.nodes = 3000;
  spec.group_size = {1000, 200, 40};
  spec.level_fraction = {0.07, 0.2, 0.7};
  std::string out = "synthetic";

  app.add_option("-o,--out", out, "Output directory")->capture_default_str();
  app.add_option("-n,--nodes", spec.nodes, "Planted publications")->capture_default_str();
  app.add_option("--groups", spec.group_size, "Group sizes, broadest first")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--fractions", spec.level_fraction, "Edge share kept inside each level's group")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--degree", spec.average_degree, "Average degree")->capture_default_str();
  app.add_option("--isolated", spec.isolated, "Extra publications without relations");
  app.add_option("--components", spec.small_components, "Extra small connected components");
  app.add_option("--component-size", spec.small_component_size, "Size of each small component");
  app.add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    stratum::write_planted_corpus(out, spec);
  } catch (const stratum::Error& e) {
    std::cerr << "{\"error\":\"" << e.code() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 1;
  }
  std::cerr << "wrote " << spec.total_nodes() << " publications to " << out << '\n';
  return 0;
}
