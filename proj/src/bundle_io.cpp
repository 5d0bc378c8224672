#include "gcs/bundle_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gcs {
namespace {

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw BundleError("missing bundle file: " + p.string());
  return f;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream f = open_or_throw(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

long parse_long(const std::string& s, const char* what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw BundleError(std::string("malformed ") + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

GraphBundle load_graph_bundle(const std::filesystem::path& dir, BundleLoadReport* report) {
  BundleLoadReport local;

  // Features first; they fix n.
  std::vector<std::vector<double>> rows;
  for (const std::string& line : read_lines(dir / "features.csv")) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw BundleError("features.csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  GraphBundle bundle;
  bundle.features = DenseMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) bundle.features(i, j) = rows[i][j];
  }

  // Edges.
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (const std::string& line : read_lines(dir / "edges.tsv")) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw BundleError("edges.tsv: expected 'u<TAB>v': " + line);
    const long u = parse_long(line.substr(0, tab), "edge endpoint");
    const long v = parse_long(line.substr(tab + 1), "edge endpoint");
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      throw BundleError("edges.tsv: node index out of range: " + line);
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v), 1.0);
    ++local.raw_edge_lines;
  }
  Graph::BuildStats stats;
  bundle.graph = Graph::from_edges(n, edges, &stats);
  local.undirected_edges = bundle.graph.num_edges();
  if (stats.duplicate_edges > 0) {
    local.warnings.push_back("collapsed " + std::to_string(stats.duplicate_edges) +
                             " duplicate edge(s), weights summed");
  }
  if (stats.self_loops_dropped > 0) {
    local.warnings.push_back("dropped " + std::to_string(stats.self_loops_dropped) +
                             " self-loop(s)");
  }

  // Labels.
  const auto label_lines = read_lines(dir / "labels.csv");
  if (label_lines.size() != n) {
    throw BundleError("labels.csv: row count " + std::to_string(label_lines.size()) +
                      " does not match features (" + std::to_string(n) + ")");
  }
  bundle.split.labels.resize(n);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const long c = parse_long(label_lines[i], "label");
    if (c < -1) throw BundleError("labels.csv: invalid class " + label_lines[i]);
    bundle.split.labels[i] = static_cast<int>(c);
    max_label = std::max(max_label, static_cast<int>(c));
  }
  bundle.split.num_classes = static_cast<std::size_t>(max_label + 1);

  // Split.
  for (const std::string& line : read_lines(dir / "split.tsv")) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw BundleError("split.tsv: expected '<index><TAB><set>'");
    const long idx = parse_long(line.substr(0, tab), "split index");
    const std::string set = line.substr(tab + 1);
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw BundleError("split.tsv: node index out of range: " + line);
    }
    if (bundle.split.labels[static_cast<std::size_t>(idx)] < 0) {
      throw BundleError("split.tsv: node " + std::to_string(idx) + " is unlabeled");
    }
    if (set == "train") bundle.split.train.push_back(static_cast<std::size_t>(idx));
    else if (set == "val") bundle.split.val.push_back(static_cast<std::size_t>(idx));
    else if (set == "test") bundle.split.test.push_back(static_cast<std::size_t>(idx));
    else throw BundleError("split.tsv: unknown set '" + set + "'");
  }

  if (report != nullptr) *report = local;
  return bundle;
}

void save_graph_bundle(const std::filesystem::path& dir, const GraphBundle& bundle) {
  std::filesystem::create_directories(dir);
  const Graph& g = bundle.graph;
  {
    std::ofstream f(dir / "edges.tsv");
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
      for (std::size_t p = g.neighbor_begin(u); p < g.neighbor_end(u); ++p) {
        if (g.neighbor(p) > u) f << u << '\t' << g.neighbor(p) << '\n';
      }
    }
  }
  {
    std::ofstream f(dir / "features.csv");
    f.precision(17);
    for (std::size_t i = 0; i < bundle.features.rows(); ++i) {
      for (std::size_t j = 0; j < bundle.features.cols(); ++j) {
        if (j > 0) f << ',';
        f << bundle.features(i, j);
      }
      f << '\n';
    }
  }
  {
    std::ofstream f(dir / "labels.csv");
    for (int c : bundle.split.labels) f << c << '\n';
  }
  {
    std::ofstream f(dir / "split.tsv");
    for (std::size_t v : bundle.split.train) f << v << "\ttrain\n";
    for (std::size_t v : bundle.split.val) f << v << "\tval\n";
    for (std::size_t v : bundle.split.test) f << v << "\ttest\n";
  }
}

void save_partition(const std::filesystem::path& file, const std::vector<std::size_t>& assignment) {
  std::ofstream f(file);
  for (std::size_t v = 0; v < assignment.size(); ++v) f << v << '\t' << assignment[v] << '\n';
}

std::vector<std::size_t> load_partition(const std::filesystem::path& file) {
  std::vector<std::size_t> assignment;
  for (const std::string& line : read_lines(file)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw BundleError("partition.tsv: expected '<node>\t<cluster>'");
    const long v = parse_long(line.substr(0, tab), "node");
    const long c = parse_long(line.substr(tab + 1), "cluster");
    if (v < 0 || c < 0) throw BundleError("partition.tsv: negative index");
    if (assignment.size() <= static_cast<std::size_t>(v)) {
      assignment.resize(static_cast<std::size_t>(v) + 1, 0);
    }
    assignment[static_cast<std::size_t>(v)] = static_cast<std::size_t>(c);
  }
  return assignment;
}

}  // namespace gcs
