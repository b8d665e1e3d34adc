#include "bgd/graph.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {

Graph::Graph(int n) : n_(n) {
  if (n < 1) throw InvalidArgument("graph needs at least one node");
  bits_.assign(num_pairs(n), 0);
}

Graph::Graph(int n, std::vector<std::uint8_t> bits) : n_(n), bits_(std::move(bits)) {
  if (n < 1) throw InvalidArgument("graph needs at least one node");
  if (bits_.size() != num_pairs(n)) throw InvalidArgument("edge-bit vector has wrong length");
  for (auto& b : bits_) {
    if (b > 1) throw InvalidArgument("edge bits must be 0 or 1");
  }
}

std::size_t Graph::pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n || i == j) throw InvalidArgument("invalid node pair");
  const auto ii = static_cast<std::size_t>(i);
  return ii * static_cast<std::size_t>(n) - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

bool Graph::has_edge(int i, int j) const { return bits_[pair_index(n_, i, j)] != 0; }

void Graph::set_edge(int i, int j, bool present) { bits_[pair_index(n_, i, j)] = present ? 1 : 0; }

std::size_t Graph::num_edges() const {
  std::size_t m = 0;
  for (auto b : bits_) m += b;
  return m;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(n_), 0);
  std::size_t k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j, ++k) {
      if (bits_[k]) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
      }
    }
  }
  return deg;
}

std::vector<std::uint8_t> Graph::adjacency() const {
  const auto n = static_cast<std::size_t>(n_);
  std::vector<std::uint8_t> a(n * n, 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      a[i * n + j] = a[j * n + i] = bits_[k];
    }
  }
  return a;
}

Graph er_sample(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability outside [0, 1]");
  std::vector<std::uint8_t> bits(Graph::num_pairs(n));
  for (auto& b : bits) b = rng.bernoulli(p) ? 1 : 0;
  return Graph(n, std::move(bits));
}

Graph gen_community_small(int n_total, double p_intra, double inter_edge_rate, Rng& rng) {
  if (n_total < 4 || n_total % 2 != 0) throw InvalidArgument("n_total must be even and >= 4");
  if (!(p_intra >= 0.0 && p_intra <= 1.0)) throw InvalidArgument("p_intra outside [0, 1]");
  if (!(inter_edge_rate >= 0.0)) throw InvalidArgument("inter_edge_rate must be >= 0");
  const int half = n_total / 2;
  const auto cross_pairs = static_cast<std::size_t>(half) * static_cast<std::size_t>(half);
  const auto n_inter = static_cast<std::size_t>(std::ceil(inter_edge_rate * n_total));
  if (n_inter > cross_pairs) throw InvalidArgument("more inter-block edges requested than exist");

  Graph g(n_total);
  for (int block = 0; block < 2; ++block) {
    const int off = block * half;
    for (int i = 0; i < half; ++i) {
      for (int j = i + 1; j < half; ++j) {
        if (rng.bernoulli(p_intra)) g.set_edge(off + i, off + j);
      }
    }
  }
  // Partial Fisher-Yates over the half*half cross pairs.
  std::vector<std::size_t> pool(cross_pairs);
  for (std::size_t k = 0; k < cross_pairs; ++k) pool[k] = k;
  for (std::size_t k = 0; k < n_inter; ++k) {
    const std::size_t pick = k + rng.below(cross_pairs - k);
    std::swap(pool[k], pool[pick]);
    const auto a = static_cast<int>(pool[k] / static_cast<std::size_t>(half));
    const auto b = static_cast<int>(pool[k] % static_cast<std::size_t>(half));
    g.set_edge(a, half + b);
  }
  return g;
}

Graph gen_sbm(std::span<const int> block_sizes, double p_intra, double p_inter, Rng& rng) {
  if (block_sizes.empty()) throw InvalidArgument("need at least one block");
  std::vector<int> block_of;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] < 1) throw InvalidArgument("block sizes must be >= 1");
    block_of.insert(block_of.end(), static_cast<std::size_t>(block_sizes[b]), static_cast<int>(b));
  }
  const int n = static_cast<int>(block_of.size());
  std::vector<std::uint8_t> bits(Graph::num_pairs(n));
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      const bool same = block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)];
      bits[k] = rng.bernoulli(same ? p_intra : p_inter) ? 1 : 0;
    }
  }
  return Graph(n, std::move(bits));
}

double empirical_edge_prob(const GraphDataset& ds) {
  std::size_t edges = 0, pairs = 0;
  for (const auto& g : ds.graphs) {
    edges += g.num_edges();
    pairs += Graph::num_pairs(g.n());
  }
  if (pairs == 0) throw InvalidArgument("dataset has no node pairs");
  return static_cast<double>(edges) / static_cast<double>(pairs);
}

std::string graph_to_json_line(const Graph& g) {
  std::string out = "{\"n\":" + std::to_string(g.n()) + ",\"edges\":[";
  bool first = true;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j) {
      if (!g.has_edge(i, j)) continue;
      if (!first) out += ',';
      first = false;
      out += '[' + std::to_string(i) + ',' + std::to_string(j) + ']';
    }
  }
  out += "]}";
  return out;
}

Graph graph_from_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!rec.is_object()) throw ParseError("record is not an object", line_no);
  for (const auto& [key, _] : rec.items()) {
    if (key != "n" && key != "edges") throw ParseError("unknown field '" + key + "'", line_no);
  }
  if (!rec.contains("n") || !rec["n"].is_number_integer()) {
    throw ParseError("missing integer field 'n'", line_no);
  }
  if (!rec.contains("edges") || !rec["edges"].is_array()) {
    throw ParseError("missing array field 'edges'", line_no);
  }
  const auto n64 = rec["n"].get<std::int64_t>();
  if (n64 < 1 || n64 > 100000) throw ParseError("n out of range", line_no);
  const int n = static_cast<int>(n64);
  Graph g(n);
  std::size_t prev = 0;
  bool have_prev = false;
  for (const auto& e : rec["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError("edge must be a pair of integers", line_no);
    }
    const auto i = e[0].get<std::int64_t>(), j = e[1].get<std::int64_t>();
    if (i < 0 || j >= n) throw ParseError("edge endpoint out of range", line_no);
    if (i >= j) throw ParseError("edge [i, j] requires i < j", line_no);
    const auto idx = Graph::pair_index(n, static_cast<int>(i), static_cast<int>(j));
    if (have_prev && idx <= prev) throw ParseError("edges not strictly ascending", line_no);
    prev = idx;
    have_prev = true;
    g.set_edge(static_cast<int>(i), static_cast<int>(j));
  }
  return g;
}

void write_dataset(const GraphDataset& ds, const std::filesystem::path& path) {
  std::string out;
  for (const auto& g : ds.graphs) {
    out += graph_to_json_line(g);
    out += '\n';
  }
  write_file_atomic(path, out);
}

GraphDataset read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  GraphDataset ds;
  ds.descriptor.type = "file";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ds.graphs.push_back(graph_from_json_line(line, line_no));
  }
  if (ds.graphs.empty()) throw ParseError("dataset file contains no graphs: " + path.string());
  return ds;
}

}  // namespace bgd
