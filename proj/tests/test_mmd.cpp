#include <doctest.h>

#include <cmath>

#include "bgd/error.hpp"
#include "bgd/mmd.hpp"
#include "oracles.hpp"

using namespace bgd;
using oracle::oracle_mmd;

namespace {

Descriptor random_hist(Rng& rng, int bins) {
  Descriptor h(static_cast<std::size_t>(bins));
  double s = 0;
  for (auto& x : h) s += (x = rng.uniform());
  for (auto& x : h) x /= s;
  return h;
}

KernelFn tv_kernel(double sigma) {
  return [sigma](std::span<const double> x, std::span<const double> y) {
    return gaussian_tv_kernel(x, y, sigma);
  };
}

Graph complete(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j);
  return g;
}

}  // namespace

TEST_CASE("tv distance") {
  const std::vector<double> h{0.2, 0.3, 0.5};
  CHECK(tv_distance(h, h) == 0.0);
  CHECK(tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
  CHECK(tv_distance(std::vector<double>{0.5, 0.5}, std::vector<double>{0.75, 0.25}) == 0.25);
  CHECK_THROWS_AS(tv_distance(std::vector<double>{1}, std::vector<double>{0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(tv_distance(std::vector<double>{0.5, 0.1}, std::vector<double>{0.5, 0.5}), InvalidArgument);
}

TEST_CASE("gaussian tv kernel") {
  const std::vector<double> a{1, 0}, b{0, 1};
  CHECK(gaussian_tv_kernel(a, a, 1.0) == 1.0);
  CHECK(gaussian_tv_kernel(a, b, 1.0) == doctest::Approx(0.606531).epsilon(1e-6));
  double last = 2.0;
  for (double w = 0.0; w <= 1.0; w += 0.1) {
    const std::vector<double> c{1.0 - w, w};
    const double k = gaussian_tv_kernel(a, c, 1.0);
    CHECK(k < last);
    last = k;
  }
  CHECK_THROWS_AS(gaussian_tv_kernel(a, b, 0.0), InvalidArgument);
}

TEST_CASE("mmd_sq basic values") {
  const std::vector<Descriptor> x{{1, 0}}, y{{0, 1}};
  CHECK(mmd_sq(x, x, tv_kernel(1.0)) == 0.0);
  CHECK(mmd_sq(x, y, tv_kernel(1.0)) == doctest::Approx(2 - 2 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(mmd_sq(x, y, tv_kernel(1.0)) == doctest::Approx(0.786939).epsilon(1e-6));
  CHECK_THROWS_AS(mmd_sq({}, y, tv_kernel(1.0)), InvalidArgument);

  const std::vector<Descriptor> a{{0.5, 0.5}, {0.2, 0.8}}, b{{0.9, 0.1}, {1.0, 0.0}};
  CHECK(std::abs(mmd_sq(a, b, tv_kernel(1.0)) - oracle_mmd(a, b, 1.0)) < 1e-12);
}

TEST_CASE("mmd_sq properties against the double-sum oracle") {
  Rng rng(12);
  for (int r = 0; r < 300; ++r) {
    const int bins = 2 + static_cast<int>(rng.below(10));
    std::vector<Descriptor> a, b;
    const auto na = 1 + rng.below(5), nb = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < na; ++i) a.push_back(random_hist(rng, bins));
    for (std::uint64_t i = 0; i < nb; ++i) b.push_back(random_hist(rng, bins));
    const double sigma = rng.uniform(0.2, 2.0);
    const double ab = mmd_sq(a, b, tv_kernel(sigma));
    CHECK(ab >= 0.0);
    CHECK(ab == mmd_sq(b, a, tv_kernel(sigma)));
    CHECK(mmd_sq(a, a, tv_kernel(sigma)) == 0.0);
    CHECK(std::abs(ab - std::max(0.0, oracle_mmd(a, b, sigma))) < 1e-12);
  }
}

TEST_CASE("shrinking distance decreases mmd") {
  const std::vector<Descriptor> x{{1, 0}};
  double last = 10.0;
  for (double w = 1.0; w > 0.0; w -= 0.125) {
    const std::vector<Descriptor> y{{1.0 - w, w}};
    const double v = mmd_sq(x, y, tv_kernel(1.0));
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("mmd suite") {
  Rng rng(13);
  GraphDataset d;
  for (int i = 0; i < 6; ++i) d.graphs.push_back(er_sample(8, 0.4, rng));
  const auto self = mmd_suite(d, d);
  CHECK(self == MMDResult{0, 0, 0, 0});

  GraphDataset full, empty;
  for (int i = 0; i < 3; ++i) {
    full.graphs.push_back(complete(6));
    empty.graphs.push_back(Graph(6));
  }
  const auto r = mmd_suite(full, empty);
  // every degree histogram is a point mass at opposite ends: TV = 1
  CHECK(r.degree == doctest::Approx(2 - 2 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(r.degree > 0.0);
  CHECK(r.orbit >= 0.0);
  CHECK_THROWS_AS(mmd_suite(GraphDataset{}, d), InvalidArgument);
}

TEST_CASE("mmd suite toy pair by hand") {
  // A = {K3, P3, empty}, B = {K3}; n = 3, degree bins 0..2.
  GraphDataset a, b;
  Graph k3(3), p3(3);
  k3.set_edge(0, 1);
  k3.set_edge(1, 2);
  k3.set_edge(0, 2);
  p3.set_edge(0, 1);
  p3.set_edge(1, 2);
  a.graphs = {k3, p3, Graph(3)};
  b.graphs = {k3};
  const std::vector<Descriptor> deg_a{{0, 0, 1}, {0, 2.0 / 3, 1.0 / 3}, {1, 0, 0}};
  const std::vector<Descriptor> deg_b{{0, 0, 1}};
  const auto r = mmd_suite(a, b);
  CHECK(std::abs(r.degree - oracle_mmd(deg_a, deg_b, 1.0)) < 1e-12);

  // clustering: K3 all ones (last bin), P3 and empty all zeros (first bin)
  std::vector<Descriptor> cl_a(3, Descriptor(100, 0.0)), cl_b(1, Descriptor(100, 0.0));
  cl_a[0][99] = 1;
  cl_a[1][0] = 1;
  cl_a[2][0] = 1;
  cl_b[0][99] = 1;
  CHECK(std::abs(r.clustering - oracle_mmd(cl_a, cl_b, 1.0)) < 1e-12);
}

TEST_CASE("mmd result record") {
  CHECK(mmd_result_csv({0.5, 0.25, 0, 1}) == "degree,clustering,spectrum,orbit\n0.5,0.25,0,1\n");
}
