#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "bgd/error.hpp"
#include "bgd/graph.hpp"
#include "bgd/stats.hpp"
#include "oracles.hpp"

using namespace bgd;
using oracle::brute_orbits;

namespace {

Graph from_edges(int n, std::initializer_list<std::pair<int, int>> edges) {
  Graph g(n);
  for (auto [i, j] : edges) g.set_edge(i, j);
  return g;
}

Graph complete(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j);
  return g;
}

std::vector<double> eigen_reference(const Graph& g) {
  const auto L = normalized_laplacian(g);
  Eigen::MatrixXd M(g.n(), g.n());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) M(i, j) = L[static_cast<std::size_t>(i * g.n() + j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + g.n());
  std::sort(ev.begin(), ev.end());
  return ev;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("pair indexing") {
  const int n = 7;
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CHECK(Graph::pair_index(n, i, j) == k);
      CHECK(Graph::pair_index(n, j, i) == k);
      ++k;
    }
  CHECK(k == Graph::num_pairs(n));
  CHECK_THROWS_AS(Graph::pair_index(n, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(Graph(3, {1, 0}), InvalidArgument);
}

TEST_CASE("er_sample") {
  Rng rng(1);
  CHECK(er_sample(5, 0.0, rng).num_edges() == 0);
  CHECK(er_sample(5, 1.0, rng).num_edges() == 10);
  double total = 0.0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) total += static_cast<double>(er_sample(20, 0.3, rng).num_edges());
  const double sd = std::sqrt(190 * 0.3 * 0.7 / reps);
  CHECK(std::abs(total / reps - 57.0) < 3.0 * sd);
  Rng a(9), b(9);
  CHECK(er_sample(10, 0.4, a) == er_sample(10, 0.4, b));
}

TEST_CASE("community_small") {
  Rng rng(2);
  const Graph g = gen_community_small(12, 1.0, 0.0, rng);
  CHECK(g.num_edges() == 30);
  for (int i = 0; i < 6; ++i)
    for (int j = 6; j < 12; ++j) CHECK_FALSE(g.has_edge(i, j));

  double intra = 0.0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    const Graph c = gen_community_small(12, 0.7, 0.05, rng);
    int inter = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = 6; j < 12; ++j) inter += c.has_edge(i, j);
    CHECK(inter == 1);
    intra += static_cast<double>(c.num_edges()) - inter;
  }
  const double sd = std::sqrt(30 * 0.7 * 0.3 / reps);
  CHECK(std::abs(intra / reps - 21.0) < 3.0 * sd);
  CHECK_THROWS_AS(gen_community_small(12, 0.7, 4.0, rng), InvalidArgument);
  CHECK_THROWS_AS(gen_community_small(11, 0.7, 0.05, rng), InvalidArgument);
}

TEST_CASE("sbm") {
  Rng rng(3);
  const std::vector<int> two{3, 3};
  const Graph g = gen_sbm(two, 1.0, 0.0, rng);
  CHECK(g == from_edges(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}}));

  const std::vector<int> one{2};
  int hits = 0;
  for (int r = 0; r < 4000; ++r) hits += static_cast<int>(gen_sbm(one, 0.5, 0.0, rng).num_edges());
  CHECK(std::abs(hits / 4000.0 - 0.5) < 3.0 * std::sqrt(0.25 / 4000));

  const std::vector<int> blocks{10, 10};
  double total = 0.0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) total += static_cast<double>(gen_sbm(blocks, 0.3, 0.05, rng).num_edges());
  const double var = 90 * 0.3 * 0.7 + 100 * 0.05 * 0.95;
  CHECK(std::abs(total / reps - 32.0) < 3.0 * std::sqrt(var / reps));
}

TEST_CASE("degree histogram") {
  auto h = degree_histogram(complete(3), 4);
  CHECK(h == Histogram{0, 0, 1, 0});
  h = degree_histogram(Graph(4), 3);
  CHECK(h == Histogram{1, 0, 0});
  h = degree_histogram(from_edges(3, {{0, 1}, {1, 2}}), 3);
  CHECK(h[1] == doctest::Approx(2.0 / 3.0));
  CHECK(h[2] == doctest::Approx(1.0 / 3.0));
  h = degree_histogram(complete(5), 2);  // overflow into last bin
  CHECK(h == Histogram{0, 1});
}

TEST_CASE("clustering coefficients") {
  CHECK(clustering_coeffs(complete(3)) == std::vector<double>{1, 1, 1});
  const Graph star = from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(clustering_coeffs(star)[0] == 0.0);
  Graph diamond = complete(4);
  diamond.set_edge(0, 1, false);
  const auto cc = clustering_coeffs(diamond);
  CHECK(cc[0] == 1.0);
  CHECK(cc[1] == 1.0);
  CHECK(cc[2] == doctest::Approx(2.0 / 3.0));
  CHECK(cc[3] == doctest::Approx(2.0 / 3.0));
  const auto h = clustering_histogram(diamond);
  CHECK(h.size() == 100);
  CHECK(h[99] == 0.5);
  CHECK(h[66] == 0.5);
}

TEST_CASE("laplacian spectrum") {
  auto ev = laplacian_spectrum(complete(3));
  CHECK(std::abs(ev[0]) < 1e-8);
  CHECK(std::abs(ev[1] - 1.5) < 1e-8);
  CHECK(std::abs(ev[2] - 1.5) < 1e-8);
  ev = laplacian_spectrum(from_edges(3, {{0, 1}, {1, 2}}));
  CHECK(std::abs(ev[0]) < 1e-8);
  CHECK(std::abs(ev[1] - 1.0) < 1e-8);
  CHECK(std::abs(ev[2] - 2.0) < 1e-8);
  CHECK(laplacian_spectrum(Graph(3)) == std::vector<double>{0, 0, 0});

  Rng rng(4);
  for (int r = 0; r < 100; ++r) {
    const int n = 2 + static_cast<int>(rng.below(19));
    const Graph g = er_sample(n, rng.uniform(), rng);
    ev = laplacian_spectrum(g);
    const auto ref = eigen_reference(g);
    int non_isolated = 0;
    for (int d : g.degrees()) non_isolated += d > 0;
    CHECK(std::abs(sum(ev) - non_isolated) < 1e-8);
    CHECK(ev.front() > -1e-9);
    CHECK(std::abs(ev.front()) < 1e-9);
    CHECK(ev.back() < 2.0 + 1e-9);
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("bipartite graphs have eigenvalue 2") {
  Rng rng(5);
  for (int r = 0; r < 30; ++r) {
    Graph g(10);
    for (int i = 0; i < 5; ++i)
      for (int j = 5; j < 10; ++j)
        if (rng.bernoulli(0.5)) g.set_edge(i, j);
    if (g.num_edges() == 0) continue;
    CHECK(std::abs(laplacian_spectrum(g).back() - 2.0) < 1e-9);
  }
}

TEST_CASE("jacobi iteration cap") {
  std::vector<double> a{2, 1, 0, 1, 2, 1, 0, 1, 2};
  CHECK_THROWS_AS(symmetric_eigenvalues(a, 3, {1e-10, 1}), NumericError);
  const auto ev = symmetric_eigenvalues(a, 3);
  CHECK(ev[0] == doctest::Approx(2 - std::sqrt(2.0)));
  CHECK(ev[2] == doctest::Approx(2 + std::sqrt(2.0)));
}

TEST_CASE("histograms sum to one") {
  Rng rng(6);
  for (int r = 0; r < 50; ++r) {
    const Graph g = er_sample(3 + static_cast<int>(rng.below(15)), rng.uniform(), rng);
    const auto st = compute_stats(g, g.n());
    CHECK(std::abs(sum(st.degree_hist) - 1.0) < 1e-9);
    CHECK(std::abs(sum(st.clustering_hist) - 1.0) < 1e-9);
    CHECK(std::abs(sum(st.spectrum_hist) - 1.0) < 1e-9);
    for (double m : st.orbit_means) CHECK(m >= 0.0);
  }
}

TEST_CASE("orbit counts worked examples") {
  const auto k4 = orbit_counts(complete(4));
  for (const auto& row : k4) {
    CHECK(row[14] == 1);
    CHECK(row[3] == 3);
    CHECK(row[0] == 3);
  }
  const auto c4 = orbit_counts(from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
  for (const auto& row : c4) {
    CHECK(row[8] == 1);
    CHECK(row[2] == 1);
    CHECK(row[1] == 2);
  }
  const auto e = orbit_counts(from_edges(2, {{0, 1}}));
  for (const auto& row : e) {
    OrbitVector expect{};
    expect[0] = 1;
    CHECK(row == expect);
  }
}

TEST_CASE("orbit counts match the template-matching enumerator") {
  Rng rng(8);
  for (int r = 0; r < 200; ++r) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const Graph g = er_sample(n, rng.uniform(), rng);
    CHECK(orbit_counts(g) == brute_orbits(g));
  }
}

TEST_CASE("empirical edge probability") {
  GraphDataset ds;
  ds.graphs = {complete(3)};
  CHECK(empirical_edge_prob(ds) == 1.0);
  ds.graphs = {Graph(4)};
  CHECK(empirical_edge_prob(ds) == 0.0);
  ds.graphs = {complete(3), Graph(3)};
  CHECK(empirical_edge_prob(ds) == 0.5);
}

TEST_CASE("dataset io") {
  const auto dir = std::filesystem::temp_directory_path() / "bgd_graphs_test";
  std::filesystem::create_directories(dir);
  Rng rng(10);
  GraphDataset ds;
  for (int r = 0; r < 100; ++r) ds.graphs.push_back(er_sample(1 + static_cast<int>(rng.below(15)), 0.4, rng));
  write_dataset(ds, dir / "ds.jsonl");
  const auto back = read_dataset(dir / "ds.jsonl");
  CHECK(back.graphs == ds.graphs);

  const auto write = [&](const std::string& text) {
    std::ofstream(dir / "bad.jsonl") << text;
    return dir / "bad.jsonl";
  };
  CHECK_THROWS_AS(read_dataset(write("")), ParseError);
  try {
    read_dataset(write("{\"n\":3,\"edges\":[[0,1]]}\n{\"n\":3,\"edges\":[[2,1]]}\n"));
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(read_dataset(write("{\"n\":3,\"edges\":[[1,1]]}\n")), ParseError);
  CHECK_THROWS_AS(read_dataset(write("{\"n\":3,\"edges\":[[0,3]]}\n")), ParseError);
  CHECK_THROWS_AS(read_dataset(write("{\"n\":3,\"edges\":[[1,2],[0,1]]}\n")), ParseError);
  CHECK_THROWS_AS(read_dataset(write("{\"n\":3,\"edges\":[[0,1]]\n")), ParseError);
  CHECK_THROWS_AS(read_dataset(write("{\"n\":3}\n")), ParseError);
  std::filesystem::remove_all(dir);
}
