#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bgd/error.hpp"
#include "bgd/harness.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

constexpr std::uint64_t kTrainSeedTag = 0x747261696e000001ULL;
constexpr std::uint64_t kSampleSeedTag = 0x73616d706c650001ULL;

struct GlobalArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig load(const GlobalArgs& g) {
  ExperimentConfig cfg = g.config.empty()
                             ? parse_config_text(R"({"dataset": {"type": "community_small"}})")
                             : parse_config(g.config);
  if (g.seed) cfg.global_seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

NoiseSchedule cli_schedule(const ExperimentConfig& cfg, double prior_p) {
  try {
    return schedule_for(cfg, prior_p);
  } catch (const InvalidArgument& e) {
    throw ConfigError("--prior-p", e.what());
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Discrete graph diffusion with adjustable Bernoulli priors"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed_value, "global seed; all randomness derives from it");
  app.add_option("--out", g.out, "output directory");

  auto* gen = app.add_subcommand("gen-data", "generate the dataset and its train/reference split");

  auto* trn = app.add_subcommand("train", "train a denoiser at one prior probability");
  double prior_p = 0.5;
  std::string data_path;
  trn->add_option("--prior-p", prior_p, "prior edge probability of the kernel");
  trn->add_option("--data", data_path, "training set (JSON lines); default: config train split");

  auto* smp = app.add_subcommand("sample", "sample graphs from a trained denoiser");
  std::string checkpoint;
  int count = 0;
  smp->add_option("--checkpoint", checkpoint, "denoiser checkpoint")->required();
  smp->add_option("--prior-p", prior_p, "prior edge probability the model was trained with");
  smp->add_option("--count", count, "number of graphs; default eval.n_generated");

  auto* evl = app.add_subcommand("eval", "MMD between generated and reference graphs");
  std::string generated_path, reference_path;
  evl->add_option("--generated", generated_path, "generated graphs (JSON lines)")->required();
  evl->add_option("--reference", reference_path, "reference graphs; default: config reference split");

  auto* swp = app.add_subcommand("sweep", "train and evaluate over the prior grid");
  auto* pmd = app.add_subcommand("prior-mmd", "MMD of untrained prior samples over the grid");
  auto* crv = app.add_subcommand("curves", "forward marginals q(x_t = 1 | x_0) per grid schedule");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    const ExperimentConfig cfg = load(g);
    const auto& out = cfg.output_dir;

    if (*gen) {
      const PreparedData data = prepare_data(cfg);
      write_dataset(data.full, out / "dataset.jsonl");
      write_dataset(data.train, out / "train.jsonl");
      write_dataset(data.reference, out / "reference.jsonl");
      std::cout << "wrote " << data.full.graphs.size() << " graphs to " << out.string() << "\n";
    } else if (*trn) {
      const GraphDataset ds = data_path.empty() ? prepare_data(cfg).train : read_dataset(data_path);
      const NoiseSchedule schedule = cli_schedule(cfg, prior_p);
      const CellSeeds seeds = cell_seeds(cfg, prior_p, kTrainSeedTag);
      const TrainResult res = train(ds, schedule, model_config_for(cfg, ds.graphs.front().n(), seeds),
                                    train_config_for(cfg, seeds));
      save_checkpoint(res.model, res.optimizer, out / "checkpoint.json");
      write_loss_csv(res.history, out / "loss.csv");
      std::cout << "final loss " << format_csv(res.history.epoch_loss.back()) << "\n";
    } else if (*smp) {
      const auto [model, opt] = load_checkpoint(checkpoint);
      const NoiseSchedule schedule = cli_schedule(cfg, prior_p);
      const KernelTables tables = build_tables(schedule);
      Rng rng(derive_seed({cfg.global_seed, kSampleSeedTag}));
      const GraphDataset samples =
          sample_graphs(model, schedule, tables, count > 0 ? count : cfg.eval.n_generated, rng);
      write_dataset(samples, out / "samples.jsonl");
      std::cout << "wrote " << samples.graphs.size() << " graphs\n";
    } else if (*evl) {
      const GraphDataset generated = read_dataset(generated_path);
      const GraphDataset reference =
          reference_path.empty() ? prepare_data(cfg).reference : read_dataset(reference_path);
      const std::string record = mmd_result_csv(mmd_suite(generated, reference, cfg.eval.mmd));
      write_file_atomic(out / "mmd.csv", record);
      std::cout << record;
    } else if (*swp) {
      const SweepResult res = run_sweep(cfg);
      std::cout << "wrote " << res.rows.size() << " rows to " << (out / "sweep.csv").string() << "\n";
    } else if (*pmd) {
      const SweepResult res = prior_mmd_experiment(cfg);
      std::cout << "wrote " << (out / "prior_mmd.csv").string() << "\n";
    } else if (*crv) {
      std::vector<NoiseSchedule> schedules;
      for (double p : cfg.kernel.p_grid) schedules.push_back(schedule_for(cfg, p));
      emit_forward_curves(schedules, out / "curves.csv");
      std::cout << "wrote " << schedules.size() << " schedules\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace bgd
