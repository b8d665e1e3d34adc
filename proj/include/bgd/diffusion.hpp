#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "bgd/denoiser.hpp"
#include "bgd/graph.hpp"
#include "bgd/kernel.hpp"

namespace bgd {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  int T = 100;
  std::uint64_t seed = 0;
  int early_probe_epochs = 10;
};

struct LossHistory {
  std::vector<double> epoch_loss;
};

struct TrainResult {
  Denoiser model;
  OptimizerState optimizer;
  LossHistory history;
};

TrainResult train(const GraphDataset& ds, const NoiseSchedule& schedule,
                  const DenoiserConfig& model_cfg, const TrainConfig& train_cfg);

// Mean of the first k epoch losses.
double early_loss(const LossHistory& history, int k);

// Trains for train_cfg.early_probe_epochs epochs and returns their mean loss.
// Identical to the prefix of a longer run with the same seeds.
double early_loss_probe(const GraphDataset& ds, const NoiseSchedule& schedule,
                        const DenoiserConfig& model_cfg, const TrainConfig& train_cfg);

// Maps a batch of noisy edge rows (all at step t) to P(x0 = 1) per edge.
using X0Predictor = std::function<Matrix(const Matrix& xt, int t)>;

X0Predictor make_predictor(const Denoiser& d, int T);

// p(x_{t-1} = 1 | x_t) = post(x0=1) p_hat + post(x0=0) (1 - p_hat). A branch
// whose x0 cannot produce x_t is dropped and the other carries full weight.
double reverse_edge_prob(const NoiseSchedule& schedule, const KernelTables& tables, int t, int xt,
                         double p_hat);

Bits reverse_step(const X0Predictor& predictor, const NoiseSchedule& schedule,
                  const KernelTables& tables, std::span<const std::uint8_t> xt, int t, Rng& rng);
Bits reverse_step(const Denoiser& d, const NoiseSchedule& schedule, const KernelTables& tables,
                  std::span<const std::uint8_t> xt, int t, Rng& rng);

// Draws x_T from the prior and runs the reverse chain down to t = 1. Each
// graph uses its own stream derived from one draw of `rng`.
GraphDataset sample_graphs(const X0Predictor& predictor, int n_nodes,
                           const NoiseSchedule& schedule, const KernelTables& tables, int count,
                           Rng& rng);
GraphDataset sample_graphs(const Denoiser& d, const NoiseSchedule& schedule,
                           const KernelTables& tables, int count, Rng& rng);

// x_T only: one prior draw per graph, using the same per-graph streams as sample_graphs.
GraphDataset sample_prior(int n_nodes, const NoiseSchedule& schedule, int count, Rng& rng);

void write_loss_csv(const LossHistory& history, const std::filesystem::path& path);

}  // namespace bgd
