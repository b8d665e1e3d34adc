#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bgd/graph.hpp"
#include "bgd/stats.hpp"

namespace bgd {

struct MMDConfig {
  double sigma = 1.0;          // Gaussian-TV bandwidth for the histogram statistics
  double orbit_sigma = 30.0;   // Gaussian-Euclidean bandwidth on mean orbit vectors
  int clustering_bins = kClusteringBins;
  int spectrum_bins = kSpectrumBins;
};

struct MMDResult {
  double degree = 0.0;
  double clustering = 0.0;
  double spectrum = 0.0;
  double orbit = 0.0;

  friend bool operator==(const MMDResult&, const MMDResult&) = default;
};

double tv_distance(std::span<const double> h1, std::span<const double> h2);

// exp(-TV^2 / (2 sigma^2))
double gaussian_tv_kernel(std::span<const double> h1, std::span<const double> h2, double sigma);

double gaussian_rbf_kernel(std::span<const double> x, std::span<const double> y, double sigma);

using Descriptor = std::vector<double>;
using KernelFn = std::function<double(std::span<const double>, std::span<const double>)>;

// Biased (V-statistic) squared MMD:
//   mean k(A, A) + mean k(B, B) - 2 mean k(A, B).
// Each mean is summed in sorted order, so swapping A and B gives the same bits.
double mmd_sq(const std::vector<Descriptor>& set_a, const std::vector<Descriptor>& set_b,
              const KernelFn& kernel);

MMDResult mmd_suite(const GraphDataset& generated, const GraphDataset& reference,
                    const MMDConfig& config = {});

// "degree,clustering,spectrum,orbit" header plus one value line.
std::string mmd_result_csv(const MMDResult& r);

}  // namespace bgd
