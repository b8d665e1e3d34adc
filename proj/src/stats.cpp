#include "bgd/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bgd/error.hpp"

namespace bgd {
namespace {

std::size_t bin_of(double x, double lo, double hi, int num_bins) {
  const double pos = (x - lo) / (hi - lo) * num_bins;
  const auto b = static_cast<long>(std::floor(pos));
  return static_cast<std::size_t>(std::clamp<long>(b, 0, num_bins - 1));
}

Histogram normalized_histogram(const std::vector<double>& values, double lo, double hi,
                               int num_bins) {
  if (num_bins < 1) throw InvalidArgument("histogram needs at least one bin");
  Histogram h(static_cast<std::size_t>(num_bins), 0.0);
  for (double v : values) h[bin_of(v, lo, hi, num_bins)] += 1.0;
  for (auto& x : h) x /= static_cast<double>(values.size());
  return h;
}

}  // namespace

Histogram degree_histogram(const Graph& g, int num_bins) {
  if (num_bins < 1) throw InvalidArgument("histogram needs at least one bin");
  Histogram h(static_cast<std::size_t>(num_bins), 0.0);
  for (int d : g.degrees()) h[static_cast<std::size_t>(std::min(d, num_bins - 1))] += 1.0;
  for (auto& x : h) x /= g.n();
  return h;
}

std::vector<double> clustering_coeffs(const Graph& g) {
  const int n = g.n();
  const auto adj = g.adjacency();
  const auto at = [&](int i, int j) { return adj[static_cast<std::size_t>(i * n + j)] != 0; };
  std::vector<double> cc(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    std::vector<int> nbrs;
    for (int u = 0; u < n; ++u) {
      if (at(v, u)) nbrs.push_back(u);
    }
    const auto d = nbrs.size();
    if (d < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a + 1; b < d; ++b) links += at(nbrs[a], nbrs[b]);
    }
    cc[static_cast<std::size_t>(v)] = static_cast<double>(links) / (0.5 * d * (d - 1));
  }
  return cc;
}

Histogram clustering_histogram(const Graph& g, int num_bins) {
  return normalized_histogram(clustering_coeffs(g), 0.0, 1.0, num_bins);
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n, JacobiOptions opts) {
  if (n < 1 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw InvalidArgument("matrix shape mismatch");
  }
  const auto N = static_cast<std::size_t>(n);
  const auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * N + j]; };
  const long cap = opts.max_rotations >= 0 ? opts.max_rotations : 100L * n * n;
  const auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        if (i != j) s += A(i, j) * A(i, j);
      }
    }
    return std::sqrt(s);
  };

  long rotations = 0;
  while (off_norm() > opts.tolerance) {
    for (std::size_t p = 0; p + 1 < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        if (rotations++ >= cap) {
          throw NumericError("Jacobi eigensolver did not converge within " + std::to_string(cap) +
                             " rotations");
        }
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          if (k == p || k == q) continue;
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = A(p, k) = c * akp - s * akq;
          A(k, q) = A(q, k) = s * akp + c * akq;
        }
        A(p, p) -= t * apq;
        A(q, q) += t * apq;
        A(p, q) = A(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(N);
  for (std::size_t i = 0; i < N; ++i) eig[i] = A(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<double> normalized_laplacian(const Graph& g) {
  const auto n = static_cast<std::size_t>(g.n());
  const auto deg = g.degrees();
  const auto adj = g.adjacency();
  std::vector<double> L(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] > 0) L[i * n + i] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i * n + j]) L[i * n + j] = -1.0 / std::sqrt(static_cast<double>(deg[i]) * deg[j]);
    }
  }
  return L;
}

std::vector<double> laplacian_spectrum(const Graph& g) {
  return symmetric_eigenvalues(normalized_laplacian(g), g.n());
}

Histogram spectrum_histogram(const Graph& g, int num_bins) {
  return normalized_histogram(laplacian_spectrum(g), 0.0, 2.0, num_bins);
}

std::vector<OrbitVector> orbit_counts(const Graph& g) {
  const int n = g.n();
  const auto adj = g.adjacency();
  const auto at = [&](int i, int j) { return adj[static_cast<std::size_t>(i * n + j)] != 0; };
  std::vector<OrbitVector> orb(static_cast<std::size_t>(n), OrbitVector{});
  const auto bump = [&](int v, int o) { ++orb[static_cast<std::size_t>(v)][static_cast<std::size_t>(o)]; };

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (at(a, b)) {
        bump(a, 0);
        bump(b, 0);
      }
      for (int c = b + 1; c < n; ++c) {
        const int v3[3] = {a, b, c};
        int d3[3] = {at(a, b) + at(a, c), at(a, b) + at(b, c), at(a, c) + at(b, c)};
        const int e3 = (d3[0] + d3[1] + d3[2]) / 2;
        if (e3 == 3) {
          for (int v : v3) bump(v, 3);
        } else if (e3 == 2) {
          for (int k = 0; k < 3; ++k) bump(v3[k], d3[k] == 2 ? 2 : 1);
        }

        for (int e = c + 1; e < n; ++e) {
          const int v[4] = {a, b, c, e};
          int d[4] = {0, 0, 0, 0};
          int edges = 0;
          for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
              if (at(v[i], v[j])) {
                ++d[i];
                ++d[j];
                ++edges;
              }
            }
          }
          const int dmax = *std::max_element(d, d + 4);
          const int dmin = *std::min_element(d, d + 4);
          if (edges < 3 || dmin == 0) continue;  // disconnected
          for (int k = 0; k < 4; ++k) {
            int o = -1;
            switch (edges) {
              case 3:
                o = dmax == 3 ? (d[k] == 3 ? 7 : 6) : (d[k] == 1 ? 4 : 5);
                break;
              case 4:
                o = dmax == 2 ? 8 : (d[k] == 1 ? 9 : d[k] == 2 ? 10 : 11);
                break;
              case 5:
                o = d[k] == 2 ? 12 : 13;
                break;
              default:
                o = 14;
            }
            bump(v[k], o);
          }
        }
      }
    }
  }
  return orb;
}

std::array<double, kNumOrbits> orbit_means(const Graph& g) {
  std::array<double, kNumOrbits> mean{};
  for (const auto& row : orbit_counts(g)) {
    for (int k = 0; k < kNumOrbits; ++k) mean[static_cast<std::size_t>(k)] += static_cast<double>(row[static_cast<std::size_t>(k)]);
  }
  for (auto& x : mean) x /= g.n();
  return mean;
}

GraphStats compute_stats(const Graph& g, int degree_bins, int clustering_bins, int spectrum_bins) {
  GraphStats s;
  s.degree_hist = degree_histogram(g, degree_bins);
  s.clustering_hist = clustering_histogram(g, clustering_bins);
  s.spectrum_hist = spectrum_histogram(g, spectrum_bins);
  s.orbit_means = orbit_means(g);
  return s;
}

}  // namespace bgd
