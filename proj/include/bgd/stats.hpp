#pragma once

// Per-graph statistics compared by the MMD evaluation: degree and clustering
// distributions, normalized-Laplacian spectrum, and 4-node graphlet orbits.

#include <array>
#include <cstdint>
#include <vector>

#include "bgd/graph.hpp"

namespace bgd {

using Histogram = std::vector<double>;

inline constexpr int kNumOrbits = 15;
using OrbitVector = std::array<std::int64_t, kNumOrbits>;

inline constexpr int kClusteringBins = 100;
inline constexpr int kSpectrumBins = 200;

struct GraphStats {
  Histogram degree_hist;
  Histogram clustering_hist;
  Histogram spectrum_hist;
  std::array<double, kNumOrbits> orbit_means{};
};

// Bins 0..num_bins-1; degrees past the end land in the last bin.
Histogram degree_histogram(const Graph& g, int num_bins);

// Local clustering: triangles through v over C(deg v, 2), 0 when deg v < 2.
std::vector<double> clustering_coeffs(const Graph& g);

Histogram clustering_histogram(const Graph& g, int num_bins = kClusteringBins);

struct JacobiOptions {
  double tolerance = 1e-10;      // off-diagonal Frobenius norm
  long max_rotations = -1;       // -1: 100 * n^2
};

// Eigenvalues of a dense symmetric matrix (row-major n*n), ascending.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n, JacobiOptions opts = {});

// L = I - D^{-1/2} A D^{-1/2}; isolated nodes give a zero row.
std::vector<double> normalized_laplacian(const Graph& g);

std::vector<double> laplacian_spectrum(const Graph& g);

Histogram spectrum_histogram(const Graph& g, int num_bins = kSpectrumBins);

// Per-node counts of the 15 orbits of connected graphlets on 2-4 nodes:
//   0 edge | 1,2 path P3 (end, middle) | 3 triangle
//   4,5 path P4 (end, inner) | 6,7 star (leaf, center) | 8 cycle C4
//   9,10,11 paw (pendant, triangle deg-2, triangle deg-3)
//   12,13 diamond (deg-2, deg-3) | 14 K4
std::vector<OrbitVector> orbit_counts(const Graph& g);

std::array<double, kNumOrbits> orbit_means(const Graph& g);

GraphStats compute_stats(const Graph& g, int degree_bins, int clustering_bins = kClusteringBins,
                         int spectrum_bins = kSpectrumBins);

}  // namespace bgd
