#include "bgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

constexpr std::uint64_t kDatasetTag = 0x6461746173657431ULL;
constexpr std::uint64_t kSplitTag = 0x73706c6974000001ULL;
constexpr std::uint64_t kPriorTag = 0x7072696f72000001ULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  }
  return s;
}

void fail_row(SweepRow& row, const std::string& what) {
  row.error = what;
  row.mmd = {kNaN, kNaN, kNaN, kNaN};
  row.early_loss = kNaN;
}

// Runs cell(i) for i in [0, n) on up to `workers` threads; results are slotted
// by index so the output does not depend on scheduling.
template <typename F>
std::vector<SweepRow> run_cells(std::size_t n, int workers, F cell) {
  std::vector<SweepRow> out(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = cell(i);
  };
  const auto extra = static_cast<std::size_t>(std::max(0, std::min<int>(workers, static_cast<int>(n)) - 1));
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < extra; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

void append_means(SweepResult& res, const ExperimentConfig& cfg) {
  const std::size_t per_p = cfg.seeds.size();
  for (std::size_t pi = 0; pi < cfg.kernel.p_grid.size(); ++pi) {
    SweepRow mean;
    mean.p = cfg.kernel.p_grid[pi];
    mean.seed = "mean";
    mean.is_mean = true;
    int ok = 0;
    for (std::size_t si = 0; si < per_p; ++si) {
      const SweepRow& r = res.rows[pi * per_p + si];
      if (!r.error.empty()) continue;
      ++ok;
      mean.mmd.degree += r.mmd.degree;
      mean.mmd.clustering += r.mmd.clustering;
      mean.mmd.spectrum += r.mmd.spectrum;
      mean.mmd.orbit += r.mmd.orbit;
      mean.early_loss += r.early_loss;
      mean.wall_time_s += r.wall_time_s;
    }
    if (ok == 0) {
      fail_row(mean, "all seeds failed");
    } else {
      mean.mmd.degree /= ok;
      mean.mmd.clustering /= ok;
      mean.mmd.spectrum /= ok;
      mean.mmd.orbit /= ok;
      mean.early_loss /= ok;
      mean.wall_time_s /= ok;
    }
    res.rows.push_back(std::move(mean));
  }
}

void write_meta(const ExperimentConfig& cfg, const PreparedData& data, const char* experiment) {
  nlohmann::json meta = {
      {"experiment", experiment},
      {"code_version", kVersion},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"config", cfg.to_json()},
      {"empirical_edge_prob", empirical_edge_prob(data.full)},
      {"split",
       {{"policy", "seeded 50/50 train/reference"},
        {"train_graphs", data.train.graphs.size()},
        {"reference_graphs", data.reference.graphs.size()}}}};
  write_file_atomic(cfg.output_dir / "meta.json", meta.dump(2) + "\n");
}

int fixed_node_count(const GraphDataset& ds) {
  const int n = ds.graphs.front().n();
  for (const auto& g : ds.graphs) {
    if (g.n() != n) throw ConfigError("dataset", "training requires every graph to share n");
  }
  return n;
}

std::string row_prefix(const SweepRow& r) {
  return format_csv(r.p) + ',' + r.seed + ',' + format_csv(r.mmd.degree) + ',' +
         format_csv(r.mmd.clustering) + ',' + format_csv(r.mmd.spectrum) + ',' +
         format_csv(r.mmd.orbit);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

GraphDataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  GraphDataset ds;
  ds.descriptor.type = spec.type;
  ds.descriptor.seed = seed;
  ds.descriptor.params = {{"count", spec.count}};
  const auto pick_n = [&](bool even) {
    if (!spec.n_range) return spec.n;
    int lo = spec.n_range->first;
    const int hi = spec.n_range->second;
    if (!even) return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    lo = std::max(4, lo + lo % 2);
    return lo + 2 * static_cast<int>(rng.below(static_cast<std::uint64_t>((hi - lo) / 2 + 1)));
  };
  for (int i = 0; i < spec.count; ++i) {
    if (spec.type == "community_small") {
      ds.descriptor.params["p_intra"] = spec.p_intra;
      ds.descriptor.params["inter_edge_rate"] = spec.inter_edge_rate;
      ds.graphs.push_back(gen_community_small(pick_n(true), spec.p_intra, spec.inter_edge_rate, rng));
    } else if (spec.type == "sbm") {
      ds.descriptor.params["p_intra"] = spec.p_intra;
      ds.descriptor.params["p_inter"] = spec.p_inter;
      std::vector<int> blocks = spec.block_sizes;
      if (spec.block_size_range) {
        const auto [lo, hi] = *spec.block_size_range;
        blocks.assign(static_cast<std::size_t>(spec.num_blocks), 0);
        for (auto& b : blocks) b = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
      }
      ds.graphs.push_back(gen_sbm(blocks, spec.p_intra, spec.p_inter, rng));
    } else if (spec.type == "er") {
      ds.descriptor.params["p"] = spec.p;
      ds.graphs.push_back(er_sample(pick_n(false), spec.p, rng));
    } else {
      throw ConfigError("dataset.type", "unknown dataset type '" + spec.type + "'");
    }
  }
  return ds;
}

std::pair<GraphDataset, GraphDataset> split_dataset(const GraphDataset& ds, std::uint64_t seed) {
  if (ds.graphs.size() < 2) throw InvalidArgument("need at least two graphs to split");
  std::vector<std::size_t> order(ds.graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));
  const std::size_t n_train = (order.size() + 1) / 2;
  GraphDataset train, ref;
  train.descriptor = ref.descriptor = ds.descriptor;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : ref).graphs.push_back(ds.graphs[order[k]]);
  }
  return {std::move(train), std::move(ref)};
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData d;
  d.full = generate_dataset(cfg.dataset, derive_seed({cfg.global_seed, kDatasetTag, cfg.dataset.seed}));
  auto [train, ref] = split_dataset(d.full, derive_seed({cfg.global_seed, kSplitTag, cfg.dataset.seed}));
  d.train = std::move(train);
  d.reference = std::move(ref);
  return d;
}

CellSeeds cell_seeds(const ExperimentConfig& cfg, double p, std::uint64_t seed) {
  const std::uint64_t base = derive_seed({cfg.global_seed, double_bits(p), seed});
  return {derive_seed({base, 1}), derive_seed({base, 2}), derive_seed({base, 3})};
}

DenoiserConfig model_config_for(const ExperimentConfig& cfg, int n_nodes, const CellSeeds& seeds) {
  DenoiserConfig m;
  m.n_nodes = n_nodes;
  m.hidden_sizes = cfg.model.hidden_sizes;
  m.time_embed_dim = cfg.model.time_embed_dim;
  m.seed = seeds.model;
  return m;
}

TrainConfig train_config_for(const ExperimentConfig& cfg, const CellSeeds& seeds) {
  TrainConfig t;
  t.epochs = cfg.train.epochs;
  t.batch_size = cfg.train.batch_size;
  t.learning_rate = cfg.train.learning_rate;
  t.T = cfg.kernel.T;
  t.seed = seeds.train;
  t.early_probe_epochs = cfg.train.early_probe_epochs;
  return t;
}

NoiseSchedule schedule_for(const ExperimentConfig& cfg, double p) {
  return build_schedule(p, cfg.kernel.scale_c, cfg.kernel.T, cfg.kernel.ramp_frac);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const PreparedData data = prepare_data(cfg);
  const int n_nodes = fixed_node_count(data.train);
  const std::size_t per_p = cfg.seeds.size();

  SweepResult res;
  res.empirical_edge_prob = empirical_edge_prob(data.full);
  res.rows = run_cells(cfg.kernel.p_grid.size() * per_p, cfg.workers, [&](std::size_t i) {
    SweepRow row;
    row.p = cfg.kernel.p_grid[i / per_p];
    const std::uint64_t seed = cfg.seeds[i % per_p];
    row.seed = std::to_string(seed);
    const auto start = std::chrono::steady_clock::now();
    try {
      const CellSeeds seeds = cell_seeds(cfg, row.p, seed);
      const NoiseSchedule schedule = schedule_for(cfg, row.p);
      const KernelTables tables = build_tables(schedule);
      const TrainResult trained = train(data.train, schedule, model_config_for(cfg, n_nodes, seeds),
                                        train_config_for(cfg, seeds));
      row.early_loss = early_loss(trained.history, cfg.train.early_probe_epochs);
      Rng rng(seeds.sample);
      const GraphDataset generated =
          sample_graphs(trained.model, schedule, tables, cfg.eval.n_generated, rng);
      row.mmd = mmd_suite(generated, data.reference, cfg.eval.mmd);
    } catch (const std::exception& e) {
      fail_row(row, e.what());
    }
    if (cfg.eval.record_wall_time) {
      row.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return row;
  });
  append_means(res, cfg);

  write_file_atomic(cfg.output_dir / "sweep.csv", sweep_csv(res.rows));
  write_meta(cfg, data, "sweep");
  return res;
}

SweepResult prior_mmd_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const PreparedData data = prepare_data(cfg);
  const std::size_t per_p = cfg.seeds.size();

  SweepResult res;
  res.empirical_edge_prob = empirical_edge_prob(data.full);
  res.rows = run_cells(cfg.kernel.p_grid.size() * per_p, cfg.workers, [&](std::size_t i) {
    SweepRow row;
    row.p = cfg.kernel.p_grid[i / per_p];
    const std::uint64_t seed = cfg.seeds[i % per_p];
    row.seed = std::to_string(seed);
    try {
      Rng rng(derive_seed({cell_seeds(cfg, row.p, seed).sample, kPriorTag}));
      GraphDataset prior;
      prior.descriptor.type = "er";
      const auto& ref = data.reference.graphs;
      for (int g = 0; g < cfg.eval.n_generated; ++g) {
        prior.graphs.push_back(er_sample(ref[static_cast<std::size_t>(g) % ref.size()].n(), row.p, rng));
      }
      row.mmd = mmd_suite(prior, data.reference, cfg.eval.mmd);
    } catch (const std::exception& e) {
      fail_row(row, e.what());
    }
    return row;
  });
  append_means(res, cfg);

  std::vector<SweepRow> data_rows(res.rows.begin(), res.rows.begin() + static_cast<std::ptrdiff_t>(cfg.kernel.p_grid.size() * per_p));
  write_file_atomic(cfg.output_dir / "prior_mmd.csv", prior_mmd_csv(data_rows));
  write_meta(cfg, data, "prior-mmd");
  return res;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += row_prefix(r) + ',' + format_csv(r.early_loss) + ',' + format_csv(r.wall_time_s) + ',' +
           sanitize(r.error) + '\n';
  }
  return out;
}

std::string prior_mmd_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kPriorMmdHeader) + "\n";
  for (const auto& r : rows) out += row_prefix(r) + ',' + sanitize(r.error) + '\n';
  return out;
}

std::vector<SweepRow> mean_rows(const SweepResult& r) {
  std::vector<SweepRow> out;
  for (const auto& row : r.rows) {
    if (row.is_mean) out.push_back(row);
  }
  return out;
}

void emit_forward_curves(const std::vector<NoiseSchedule>& schedules,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  out << kCurvesHeader << '\n';
  for (std::size_t id = 0; id < schedules.size(); ++id) {
    const auto& s = schedules[id];
    const KernelTables tab = build_tables(s);
    for (int t = 0; t <= s.T; ++t) {
      const auto k = static_cast<std::size_t>(t);
      out << id << ',' << t << ',' << format_csv(t ? s.flip_to_one(t) : 0.0) << ','
          << format_csv(t ? s.flip_to_zero(t) : 0.0) << ',' << format_csv(tab.q_from0[k]) << ','
          << format_csv(tab.q_from1[k]) << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("spearman needs paired samples");
  const auto rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace bgd
