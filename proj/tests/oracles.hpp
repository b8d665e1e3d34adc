#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "bgd/graph.hpp"
#include "bgd/mmd.hpp"
#include "bgd/stats.hpp"

// Slow reference implementations shared by the unit and acceptance tests.
namespace oracle {

using namespace bgd;

// Independent orbit oracle: match every induced subgraph on 2-4 nodes against
// labelled graphlet templates under all vertex permutations.
struct Template {
  int k;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> orbit;
};

inline const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {2, {{0, 1}}, {0, 0}},
      {3, {{0, 1}, {1, 2}}, {1, 2, 1}},
      {3, {{0, 1}, {1, 2}, {0, 2}}, {3, 3, 3}},
      {4, {{0, 1}, {1, 2}, {2, 3}}, {4, 5, 5, 4}},
      {4, {{0, 1}, {0, 2}, {0, 3}}, {7, 6, 6, 6}},
      {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {8, 8, 8, 8}},
      {4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}, {10, 10, 11, 9}},
      {4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {12, 12, 13, 13}},
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {14, 14, 14, 14}},
  };
  return t;
}

inline void classify(const Graph& g, const std::vector<int>& nodes, std::vector<OrbitVector>& out) {
  const int k = static_cast<int>(nodes.size());
  for (const auto& tpl : templates()) {
    if (tpl.k != k) continue;
    std::array<std::array<bool, 4>, 4> tadj{};
    for (auto [a, b] : tpl.edges) tadj[a][b] = tadj[b][a] = true;
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      bool ok = true;
      for (int a = 0; a < k && ok; ++a)
        for (int b = a + 1; b < k && ok; ++b)
          ok = tadj[a][b] == g.has_edge(nodes[perm[a]], nodes[perm[b]]);
      if (ok) {
        for (int a = 0; a < k; ++a) ++out[nodes[perm[a]]][tpl.orbit[a]];
        return;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

inline std::vector<OrbitVector> brute_orbits(const Graph& g) {
  const int n = g.n();
  std::vector<OrbitVector> out(n, OrbitVector{});
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    if (k < 2 || k > 4) continue;
    std::vector<int> nodes;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1u) nodes.push_back(v);
    classify(g, nodes, out);
  }
  return out;
}

// Straight quadratic double sum, no sorting, no flooring.
inline double oracle_mmd(const std::vector<Descriptor>& a, const std::vector<Descriptor>& b, double sigma) {
  const auto k = [&](const Descriptor& x, const Descriptor& y) {
    double tv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) tv += std::fabs(x[i] - y[i]);
    tv *= 0.5;
    return std::exp(-tv * tv / (2 * sigma * sigma));
  };
  double aa = 0, bb = 0, ab = 0;
  for (const auto& x : a)
    for (const auto& y : a) aa += k(x, y);
  for (const auto& x : b)
    for (const auto& y : b) bb += k(x, y);
  for (const auto& x : a)
    for (const auto& y : b) ab += k(x, y);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return aa / (na * na) + bb / (nb * nb) - 2 * ab / (na * nb);
}

}  // namespace oracle
