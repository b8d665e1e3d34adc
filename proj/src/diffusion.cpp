#include "bgd/diffusion.hpp"

#include <array>
#include <numeric>
#include <sstream>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (cfg.early_probe_epochs < 1) throw InvalidArgument("early_probe_epochs must be >= 1");
}

Bits draw_prior(int n_nodes, double prior, Rng& rng) {
  Bits x(Graph::num_pairs(n_nodes));
  for (auto& b : x) b = rng.bernoulli(prior) ? 1 : 0;
  return x;
}

}  // namespace

TrainResult train(const GraphDataset& ds, const NoiseSchedule& schedule,
                  const DenoiserConfig& model_cfg, const TrainConfig& train_cfg) {
  validate(train_cfg);
  if (ds.graphs.empty()) throw InvalidArgument("empty training set");
  if (train_cfg.T != schedule.T) throw InvalidArgument("train config T does not match schedule");
  for (const auto& g : ds.graphs) {
    if (g.n() != model_cfg.n_nodes) {
      throw InvalidArgument("dataset graph with n = " + std::to_string(g.n()) +
                            " does not match model n_nodes = " + std::to_string(model_cfg.n_nodes));
    }
  }
  const KernelTables tables = build_tables(schedule);
  TrainResult res{init_denoiser(model_cfg), {}, {}};
  res.optimizer = init_optimizer(res.model, train_cfg.learning_rate);
  Rng rng(train_cfg.seed);

  const std::size_t N = ds.graphs.size();
  std::vector<std::size_t> order(N);
  std::vector<Graph> batch;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    double total = 0.0;
    for (std::size_t start = 0; start < N; start += static_cast<std::size_t>(train_cfg.batch_size)) {
      const std::size_t stop = std::min(N, start + static_cast<std::size_t>(train_cfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(ds.graphs[order[k]]);
      const double loss = train_step(res.model, res.optimizer, batch, schedule, tables, rng);
      total += loss * static_cast<double>(stop - start);
    }
    res.history.epoch_loss.push_back(total / static_cast<double>(N));
  }
  return res;
}

double early_loss(const LossHistory& history, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > history.epoch_loss.size()) {
    throw InvalidArgument("loss history shorter than probe window");
  }
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += history.epoch_loss[static_cast<std::size_t>(i)];
  return s / k;
}

double early_loss_probe(const GraphDataset& ds, const NoiseSchedule& schedule,
                        const DenoiserConfig& model_cfg, const TrainConfig& train_cfg) {
  validate(train_cfg);
  if (train_cfg.epochs < train_cfg.early_probe_epochs) {
    throw InvalidArgument("epochs must be >= early_probe_epochs");
  }
  TrainConfig probe = train_cfg;
  probe.epochs = train_cfg.early_probe_epochs;
  return early_loss(train(ds, schedule, model_cfg, probe).history, probe.epochs);
}

X0Predictor make_predictor(const Denoiser& d, int T) {
  return [&d, T](const Matrix& xt, int t) {
    const std::vector<int> steps(static_cast<std::size_t>(xt.rows()), t);
    return predict_x0_batch(d, xt, steps, T);
  };
}

double reverse_edge_prob(const NoiseSchedule& schedule, const KernelTables& tables, int t, int xt,
                         double p_hat) {
  const bool from1 = !conditioning_impossible(tables, t, xt, 1);
  const bool from0 = !conditioning_impossible(tables, t, xt, 0);
  if (from1 && from0) {
    return posterior_prob(schedule, tables, t, xt, 1) * p_hat +
           posterior_prob(schedule, tables, t, xt, 0) * (1.0 - p_hat);
  }
  if (from1) return posterior_prob(schedule, tables, t, xt, 1);
  if (from0) return posterior_prob(schedule, tables, t, xt, 0);
  throw ConditioningImpossible("x_t unreachable from either clean bit");
}

Bits reverse_step(const X0Predictor& predictor, const NoiseSchedule& schedule,
                  const KernelTables& tables, std::span<const std::uint8_t> xt, int t, Rng& rng) {
  if (t < 1 || t > schedule.T) throw InvalidArgument("step outside [1, T]");
  Matrix row(1, static_cast<Eigen::Index>(xt.size()));
  for (std::size_t k = 0; k < xt.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = xt[k];
  const Matrix p_hat = predictor(row, t);
  Bits out(xt.size());
  for (std::size_t k = 0; k < xt.size(); ++k) {
    const double p = reverse_edge_prob(schedule, tables, t, xt[k], p_hat(0, static_cast<Eigen::Index>(k)));
    out[k] = rng.bernoulli(p) ? 1 : 0;
  }
  return out;
}

Bits reverse_step(const Denoiser& d, const NoiseSchedule& schedule, const KernelTables& tables,
                  std::span<const std::uint8_t> xt, int t, Rng& rng) {
  return reverse_step(make_predictor(d, schedule.T), schedule, tables, xt, t, rng);
}

GraphDataset sample_graphs(const X0Predictor& predictor, int n_nodes,
                           const NoiseSchedule& schedule, const KernelTables& tables, int count,
                           Rng& rng) {
  if (count < 1) throw InvalidArgument("count must be >= 1");
  const double prior = prior_prob(schedule);
  const std::uint64_t base = rng.next_u64();
  const auto m = static_cast<Eigen::Index>(Graph::num_pairs(n_nodes));

  std::vector<Rng> streams;
  Matrix x(count, m);
  for (int g = 0; g < count; ++g) {
    streams.emplace_back(derive_seed({base, static_cast<std::uint64_t>(g)}));
    const Bits xT = draw_prior(n_nodes, prior, streams.back());
    for (Eigen::Index k = 0; k < m; ++k) x(g, k) = xT[static_cast<std::size_t>(k)];
  }
  for (int t = schedule.T; t >= 1; --t) {
    const Matrix p_hat = predictor(x, t);
    for (int g = 0; g < count; ++g) {
      for (Eigen::Index k = 0; k < m; ++k) {
        const double p = reverse_edge_prob(schedule, tables, t, x(g, k) != 0.0, p_hat(g, k));
        x(g, k) = streams[static_cast<std::size_t>(g)].bernoulli(p) ? 1.0 : 0.0;
      }
    }
  }

  GraphDataset out;
  out.descriptor.type = "diffusion_samples";
  out.descriptor.params["prior_p"] = prior;
  for (int g = 0; g < count; ++g) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) bits[static_cast<std::size_t>(k)] = x(g, k) != 0.0;
    out.graphs.emplace_back(n_nodes, std::move(bits));
  }
  return out;
}

GraphDataset sample_graphs(const Denoiser& d, const NoiseSchedule& schedule,
                           const KernelTables& tables, int count, Rng& rng) {
  return sample_graphs(make_predictor(d, schedule.T), d.config.n_nodes, schedule, tables, count,
                       rng);
}

GraphDataset sample_prior(int n_nodes, const NoiseSchedule& schedule, int count, Rng& rng) {
  if (count < 1) throw InvalidArgument("count must be >= 1");
  const double prior = prior_prob(schedule);
  const std::uint64_t base = rng.next_u64();
  GraphDataset out;
  out.descriptor.type = "prior_samples";
  out.descriptor.params["prior_p"] = prior;
  for (int g = 0; g < count; ++g) {
    Rng stream(derive_seed({base, static_cast<std::uint64_t>(g)}));
    out.graphs.emplace_back(n_nodes, draw_prior(n_nodes, prior, stream));
  }
  return out;
}

void write_loss_csv(const LossHistory& history, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
    out << e + 1 << ',' << format_csv(history.epoch_loss[e]) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace bgd
