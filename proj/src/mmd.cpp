#include "bgd/mmd.hpp"

#include <algorithm>
#include <cmath>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

constexpr double kHistSumTol = 1e-6;

double sum_histogram(std::span<const double> h) {
  double s = 0.0;
  for (double x : h) s += x;
  return s;
}

// Mean of the kernel matrix, summed in ascending order so the result does not
// depend on which set is iterated first.
double kernel_mean(const std::vector<Descriptor>& xs, const std::vector<Descriptor>& ys,
                   const KernelFn& kernel) {
  std::vector<double> vals;
  vals.reserve(xs.size() * ys.size());
  for (const auto& x : xs) {
    for (const auto& y : ys) vals.push_back(kernel(x, y));
  }
  std::sort(vals.begin(), vals.end());
  double s = 0.0;
  for (double v : vals) s += v;
  return s / static_cast<double>(vals.size());
}

}  // namespace

double tv_distance(std::span<const double> h1, std::span<const double> h2) {
  if (h1.size() != h2.size()) throw InvalidArgument("histogram bin counts differ");
  if (std::abs(sum_histogram(h1) - 1.0) > kHistSumTol ||
      std::abs(sum_histogram(h2) - 1.0) > kHistSumTol) {
    throw InvalidArgument("histogram does not sum to 1");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) s += std::abs(h1[i] - h2[i]);
  return 0.5 * s;
}

double gaussian_tv_kernel(std::span<const double> h1, std::span<const double> h2, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const double tv = tv_distance(h1, h2);
  return std::exp(-tv * tv / (2.0 * sigma * sigma));
}

double gaussian_rbf_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
  if (x.size() != y.size()) throw InvalidArgument("vector lengths differ");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

double mmd_sq(const std::vector<Descriptor>& set_a, const std::vector<Descriptor>& set_b,
              const KernelFn& kernel) {
  if (set_a.empty() || set_b.empty()) throw InvalidArgument("MMD needs non-empty sets");
  const double aa = kernel_mean(set_a, set_a, kernel);
  const double bb = kernel_mean(set_b, set_b, kernel);
  const double ab = kernel_mean(set_a, set_b, kernel);
  // Gaussian-TV is not guaranteed positive definite; floor at zero.
  return std::max(0.0, (aa + bb) - 2.0 * ab);
}

MMDResult mmd_suite(const GraphDataset& generated, const GraphDataset& reference,
                    const MMDConfig& config) {
  if (generated.graphs.empty() || reference.graphs.empty()) {
    throw InvalidArgument("MMD needs non-empty datasets");
  }
  int max_degree = 0;
  for (const auto* ds : {&generated, &reference}) {
    for (const auto& g : ds->graphs) {
      for (int d : g.degrees()) max_degree = std::max(max_degree, d);
    }
  }
  const int degree_bins = max_degree + 1;

  struct Sets {
    std::vector<Descriptor> degree, clustering, spectrum, orbit;
  };
  const auto collect = [&](const GraphDataset& ds) {
    Sets s;
    for (const auto& g : ds.graphs) {
      auto st = compute_stats(g, degree_bins, config.clustering_bins, config.spectrum_bins);
      s.degree.push_back(std::move(st.degree_hist));
      s.clustering.push_back(std::move(st.clustering_hist));
      s.spectrum.push_back(std::move(st.spectrum_hist));
      s.orbit.emplace_back(st.orbit_means.begin(), st.orbit_means.end());
    }
    return s;
  };
  const Sets gen = collect(generated);
  const Sets ref = collect(reference);

  const KernelFn tv = [&](std::span<const double> x, std::span<const double> y) {
    return gaussian_tv_kernel(x, y, config.sigma);
  };
  const KernelFn rbf = [&](std::span<const double> x, std::span<const double> y) {
    return gaussian_rbf_kernel(x, y, config.orbit_sigma);
  };
  MMDResult r;
  r.degree = mmd_sq(gen.degree, ref.degree, tv);
  r.clustering = mmd_sq(gen.clustering, ref.clustering, tv);
  r.spectrum = mmd_sq(gen.spectrum, ref.spectrum, tv);
  r.orbit = mmd_sq(gen.orbit, ref.orbit, rbf);
  return r;
}

std::string mmd_result_csv(const MMDResult& r) {
  return "degree,clustering,spectrum,orbit\n" + format_csv(r.degree) + ',' +
         format_csv(r.clustering) + ',' + format_csv(r.spectrum) + ',' + format_csv(r.orbit) +
         '\n';
}

}  // namespace bgd
