#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgd/denoiser.hpp"
#include "bgd/diffusion.hpp"
#include "bgd/graph.hpp"
#include "bgd/kernel.hpp"
#include "bgd/mmd.hpp"

namespace bgd {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kConfigVersion = 1;

struct DatasetSpec {
  std::string type = "community_small";  // community_small | sbm | er
  int count = 200;
  std::uint64_t seed = 0;
  // community_small / er: fixed n, or n drawn per graph from n_range
  // (even values only for community_small).
  int n = 12;
  std::optional<std::pair<int, int>> n_range;
  double p = 0.5;  // er
  double p_intra = 0.7;
  double inter_edge_rate = 0.05;
  double p_inter = 0.05;
  // sbm: fixed block sizes, or num_blocks sizes drawn from block_size_range.
  std::vector<int> block_sizes{10, 10};
  std::optional<std::pair<int, int>> block_size_range;
  int num_blocks = 2;
};

struct KernelSpec {
  std::vector<double> p_grid;  // default 0, 0.05, ..., 1
  double scale_c = kDefaultScale;
  int T = 100;
  double ramp_frac = kDefaultRampFrac;
};

struct ModelSpec {
  std::vector<int> hidden_sizes{256, 256};
  int time_embed_dim = 32;
};

struct TrainSpec {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  int early_probe_epochs = 10;
};

struct EvalSpec {
  int n_generated = 64;
  MMDConfig mmd;
  // When false the wall_time_s column is written as 0 so reruns are byte-identical.
  bool record_wall_time = true;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  KernelSpec kernel;
  ModelSpec model;
  TrainSpec train;
  EvalSpec eval;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::uint64_t global_seed = 0;
  int workers = 1;
  std::filesystem::path output_dir = "results";

  nlohmann::json to_json() const;
};

std::vector<double> default_p_grid();

// Strict JSON config: unknown or duplicate keys and out-of-range values raise
// ConfigError naming the offending field. Only dataset.type is required.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text);

void validate(const ExperimentConfig& cfg);

GraphDataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed);

// Seeded 50/50 split into (train, reference); train gets the odd graph out.
std::pair<GraphDataset, GraphDataset> split_dataset(const GraphDataset& ds, std::uint64_t seed);

// Dataset and split exactly as the experiments build them from the config.
struct PreparedData {
  GraphDataset full;
  GraphDataset train;
  GraphDataset reference;
};
PreparedData prepare_data(const ExperimentConfig& cfg);

// Independent streams of one (p, seed) cell, derived from the global seed so
// that extending the grid leaves existing cells untouched.
struct CellSeeds {
  std::uint64_t model;
  std::uint64_t train;
  std::uint64_t sample;
};
CellSeeds cell_seeds(const ExperimentConfig& cfg, double p, std::uint64_t seed);

DenoiserConfig model_config_for(const ExperimentConfig& cfg, int n_nodes, const CellSeeds& seeds);
TrainConfig train_config_for(const ExperimentConfig& cfg, const CellSeeds& seeds);
NoiseSchedule schedule_for(const ExperimentConfig& cfg, double p);

struct SweepRow {
  double p = 0.0;
  std::string seed;  // seed value, or "mean" for the per-p aggregate
  MMDResult mmd;
  double early_loss = 0.0;
  double wall_time_s = 0.0;
  std::string error;
  bool is_mean = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // data rows (p-major, then seed), then one mean row per p
  double empirical_edge_prob = 0.0;
};

inline constexpr const char* kSweepHeader =
    "p,seed,mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit,early_loss,wall_time_s,error";
inline constexpr const char* kPriorMmdHeader =
    "p,seed,mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit,error";
inline constexpr const char* kCurvesHeader = "schedule_id,t,beta0,beta1,q_from0,q_from1";

// Train, sample and score every (p, seed) cell. Writes sweep.csv and meta.json
// into cfg.output_dir.
SweepResult run_sweep(const ExperimentConfig& cfg);

// Untrained baseline: ER(n, p) samples scored against the reference split.
// Writes prior_mmd.csv and meta.json into cfg.output_dir.
SweepResult prior_mmd_experiment(const ExperimentConfig& cfg);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string prior_mmd_csv(const std::vector<SweepRow>& rows);

// Rows t = 0..T per schedule; t = 0 carries zero betas.
void emit_forward_curves(const std::vector<NoiseSchedule>& schedules,
                         const std::filesystem::path& path);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Per-p mean rows of a sweep, in grid order.
std::vector<SweepRow> mean_rows(const SweepResult& r);

int cli_main(int argc, char** argv);

}  // namespace bgd
