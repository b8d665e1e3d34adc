#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bgd/rng.hpp"

namespace bgd {

// Simple undirected graph stored as the upper-triangular edge-bit vector.
// Pair (i, j), i < j, lives at index i*n - i*(i+1)/2 + (j - i - 1).
class Graph {
 public:
  explicit Graph(int n = 1);
  Graph(int n, std::vector<std::uint8_t> bits);

  static std::size_t num_pairs(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  }
  static std::size_t pair_index(int n, int i, int j);

  int n() const noexcept { return n_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  bool has_edge(int i, int j) const;
  void set_edge(int i, int j, bool present = true);
  std::size_t num_edges() const;
  std::vector<int> degrees() const;
  // Dense symmetric 0/1 adjacency, row-major n*n.
  std::vector<std::uint8_t> adjacency() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

struct GeneratorDescriptor {
  std::string type;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

struct GraphDataset {
  std::vector<Graph> graphs;
  GeneratorDescriptor descriptor;
};

Graph er_sample(int n, double p, Rng& rng);

// Two ER(n/2, p_intra) blocks on nodes [0, n/2) and [n/2, n), joined by
// ceil(inter_edge_rate * n_total) distinct uniformly chosen cross edges.
Graph gen_community_small(int n_total, double p_intra, double inter_edge_rate, Rng& rng);

Graph gen_sbm(std::span<const int> block_sizes, double p_intra, double p_inter, Rng& rng);

double empirical_edge_prob(const GraphDataset& ds);

// One JSON object per line: {"n": 5, "edges": [[0, 1], [1, 4]]}.
void write_dataset(const GraphDataset& ds, const std::filesystem::path& path);
GraphDataset read_dataset(const std::filesystem::path& path);

std::string graph_to_json_line(const Graph& g);
Graph graph_from_json_line(const std::string& line, std::size_t line_no);

}  // namespace bgd
