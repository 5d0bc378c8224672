#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gcs/graph.hpp"

namespace gcs {

// Directory layout (all text, UTF-8, LF):
//   edges.tsv     one edge per line, "u<TAB>v", 0-indexed, listed once
//   features.csv  n lines of comma-separated floats
//   labels.csv    n lines, one class index per line, -1 for unlabeled
//   split.tsv     "<index><TAB><train|val|test>" per split node

struct BundleLoadReport {
  std::size_t raw_edge_lines = 0;   // lines in edges.tsv
  std::size_t undirected_edges = 0; // after symmetrization and dedup
  std::vector<std::string> warnings;
};

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GraphBundle load_graph_bundle(const std::filesystem::path& dir,
                              BundleLoadReport* report = nullptr);

void save_graph_bundle(const std::filesystem::path& dir, const GraphBundle& bundle);

// partition.tsv: "<node><TAB><cluster>" per node.
void save_partition(const std::filesystem::path& file, const std::vector<std::size_t>& assignment);
std::vector<std::size_t> load_partition(const std::filesystem::path& file);

}  // namespace gcs
