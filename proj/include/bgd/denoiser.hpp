#pragma once

// Feed-forward x0-predictor: [noisy edge bits | sinusoidal time embedding]
// -> SiLU hidden layers -> per-edge logit -> sigmoid.
//
// The network is a flat MLP over the ordered edge vector, so it is not
// permutation equivariant; it is sized for graphs of a fixed, small n.

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bgd/graph.hpp"
#include "bgd/kernel.hpp"
#include "bgd/rng.hpp"

namespace bgd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct DenoiserConfig {
  int n_nodes = 12;
  std::vector<int> hidden_sizes{256, 256};
  int time_embed_dim = 32;
  std::uint64_t seed = 0;
};

// weight is (out x in).
struct Dense {
  Matrix weight;
  Vector bias;
};

struct Denoiser {
  DenoiserConfig config;
  std::vector<Dense> layers;

  int edge_dim() const { return static_cast<int>(Graph::num_pairs(config.n_nodes)); }
  int input_dim() const { return edge_dim() + config.time_embed_dim; }
  std::size_t parameter_count() const;
};

struct OptimizerState {
  std::vector<Dense> m;
  std::vector<Dense> v;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline constexpr double kProbClamp = 1e-12;

void validate(const DenoiserConfig& cfg);

Denoiser init_denoiser(const DenoiserConfig& cfg);

OptimizerState init_optimizer(const Denoiser& d, double learning_rate = 1e-3);

// [sin(t w_k), cos(t w_k)] with w_k = 10000^(-k / (dim/2)).
std::vector<double> time_embedding(int t, int dim);

std::vector<double> predict_x0(const Denoiser& d, std::span<const double> xt, int t, int T);

// Row b of `xt` is noised at step steps[b]; returns probabilities, same shape.
Matrix predict_x0_batch(const Denoiser& d, const Matrix& xt, std::span<const int> steps, int T);

// Mean binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> probs, std::span<const double> x0);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<Dense> grad;
};

LossAndGradient loss_and_gradient(const Denoiser& d, const Matrix& xt, std::span<const int> steps,
                                  int T, const Matrix& x0);

void adam_update(Denoiser& d, OptimizerState& opt, const std::vector<Dense>& grad);

// One optimizer step on a batch of clean graphs. Returns the pre-update loss.
double train_step(Denoiser& d, OptimizerState& opt, std::span<const Graph> batch,
                  const NoiseSchedule& schedule, const KernelTables& tables, Rng& rng);

// Flattened parameters in layer order (weight row-major, then bias).
std::vector<double> flatten(const std::vector<Dense>& layers);
void unflatten(std::span<const double> flat, std::vector<Dense>& layers);

void save_checkpoint(const Denoiser& d, const OptimizerState& opt,
                     const std::filesystem::path& path);
std::pair<Denoiser, OptimizerState> load_checkpoint(const std::filesystem::path& path);
// Also rejects a checkpoint trained for a different node count.
std::pair<Denoiser, OptimizerState> load_checkpoint(const std::filesystem::path& path,
                                                    int expected_n_nodes);

}  // namespace bgd
