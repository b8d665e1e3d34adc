#pragma once

// Asymmetric Bernoulli diffusion kernel.
//
// Each bit is noised independently by a two-state Markov chain:
//   q(x_t = 1 | x_{t-1} = 0) = beta0[t]   (0 -> 1 flip)
//   q(x_t = 0 | x_{t-1} = 1) = beta1[t]   (1 -> 0 flip)
// When both schedules plateau at (p0, p1) the chain converges to
// Bernoulli(p0 / (p0 + p1)), which on edge bits is an Erdos-Renyi prior.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bgd/rng.hpp"

namespace bgd {

using Bits = std::vector<std::uint8_t>;

struct NoiseSchedule {
  int T = 0;
  // Stored 0-based: beta0[t - 1] is the flip-to-1 probability of step t.
  std::vector<double> beta0;
  std::vector<double> beta1;
  double p0 = 0.0;
  double p1 = 0.0;

  double flip_to_one(int t) const { return beta0[static_cast<std::size_t>(t - 1)]; }
  double flip_to_zero(int t) const { return beta1[static_cast<std::size_t>(t - 1)]; }
};

// Precomputed forward marginals, indexed by t = 0..T.
struct KernelTables {
  std::vector<double> q_from0;  // q(x_t = 1 | x_0 = 0)
  std::vector<double> q_from1;  // q(x_t = 1 | x_0 = 1)
  std::vector<double> signal;   // prod_{j<=t} (1 - beta0_j - beta1_j)

  int T() const { return static_cast<int>(signal.size()) - 1; }
  double q(int t, int x0) const {
    return x0 ? q_from1[static_cast<std::size_t>(t)] : q_from0[static_cast<std::size_t>(t)];
  }
};

inline constexpr double kDefaultScale = 0.5;
inline constexpr double kDefaultRampFrac = 0.8;

// Validates and wraps explicit per-step sequences; the limits are the last entries.
NoiseSchedule make_schedule(std::vector<double> beta0, std::vector<double> beta1);

// beta^b_t = p_b * min(1, t / (ramp_frac * T)).
NoiseSchedule ramp_schedule(double p0, double p1, int T, double ramp_frac = kDefaultRampFrac);

// Schedule whose prior is exactly prior_p: (p0, p1) = (c * p, c * (1 - p)).
NoiseSchedule build_schedule(double prior_p, double scale_c = kDefaultScale, int T = 100,
                             double ramp_frac = kDefaultRampFrac);

NoiseSchedule constant_schedule(double beta0, double beta1, int T);

// Closed-form marginal q(x_t = 1 | x_0) evaluated through the eps_bar/2 products.
double forward_prob(const NoiseSchedule& schedule, int t, int x0);

// Same quantity by stepping the one-step transition forward t times.
double forward_prob_oracle(const NoiseSchedule& schedule, int t, int x0);

double prior_prob(const NoiseSchedule& schedule);

KernelTables build_tables(const NoiseSchedule& schedule);

// P(x_{t-1} = 1 | x_t, x_0).
double posterior_prob(const NoiseSchedule& schedule, const KernelTables& tables, int t, int xt,
                      int x0);

// True when x_t = xt has zero probability under x_0 = x0.
bool conditioning_impossible(const KernelTables& tables, int t, int xt, int x0);

Bits sample_forward(const KernelTables& tables, std::span<const std::uint8_t> x0_bits, int t,
                    Rng& rng);

double signal_remaining(const KernelTables& tables, int t);

// Columns: t,beta0,beta1,q_from0,q_from1,signal. Row t = 0 carries zero betas.
void write_tables_csv(const NoiseSchedule& schedule, const KernelTables& tables,
                      const std::filesystem::path& path);

}  // namespace bgd
