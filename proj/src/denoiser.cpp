#include "bgd/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

constexpr const char* kCheckpointFormat = "bgd-denoiser";
constexpr int kCheckpointVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double silu(double z) { return z * sigmoid(z); }

double silu_grad(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

std::vector<Dense> zeros_like(const std::vector<Dense>& layers) {
  std::vector<Dense> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return out;
}

Matrix build_input(const Denoiser& d, const Matrix& xt, std::span<const int> steps, int T) {
  const int m = d.edge_dim();
  const int e = d.config.time_embed_dim;
  if (xt.cols() != m) {
    throw InvalidArgument("expected " + std::to_string(m) + " edge values, got " +
                          std::to_string(xt.cols()));
  }
  if (static_cast<std::size_t>(xt.rows()) != steps.size()) {
    throw InvalidArgument("one step per batch row required");
  }
  Matrix in(xt.rows(), m + e);
  in.leftCols(m) = xt;
  for (Eigen::Index b = 0; b < xt.rows(); ++b) {
    const int t = steps[static_cast<std::size_t>(b)];
    if (t < 1 || t > T) throw InvalidArgument("step outside [1, T]");
    const auto emb = time_embedding(t, e);
    for (int k = 0; k < e; ++k) in(b, m + k) = emb[static_cast<std::size_t>(k)];
  }
  return in;
}

// Keeps pre-activations and activations for the backward pass.
struct ForwardTrace {
  std::vector<Matrix> pre;   // per layer
  std::vector<Matrix> act;   // act[0] = input, act[l+1] = output of layer l (hidden only)
  Matrix probs;
};

ForwardTrace forward(const Denoiser& d, Matrix input) {
  ForwardTrace tr;
  tr.act.push_back(std::move(input));
  for (std::size_t l = 0; l < d.layers.size(); ++l) {
    const auto& layer = d.layers[l];
    Matrix z = tr.act.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < d.layers.size()) {
      tr.act.push_back(z.unaryExpr([](double v) { return silu(v); }));
    } else {
      tr.probs = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    tr.pre.push_back(std::move(z));
  }
  return tr;
}

nlohmann::json dense_list_to_json(const std::vector<Dense>& layers) {
  auto arr = nlohmann::json::array();
  for (const auto& l : layers) {
    arr.push_back({{"rows", l.weight.rows()},
                   {"cols", l.weight.cols()},
                   {"weight", std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size())},
                   {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return arr;
}

void dense_list_from_json(const nlohmann::json& arr, std::vector<Dense>& into, const char* what) {
  if (!arr.is_array() || arr.size() != into.size()) {
    throw CheckpointError(std::string(what) + ": layer count does not match config");
  }
  for (std::size_t i = 0; i < into.size(); ++i) {
    const auto& j = arr[i];
    auto& l = into[i];
    const auto w = j.at("weight").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (j.at("rows").get<Eigen::Index>() != l.weight.rows() ||
        j.at("cols").get<Eigen::Index>() != l.weight.cols() ||
        static_cast<Eigen::Index>(w.size()) != l.weight.size() ||
        static_cast<Eigen::Index>(b.size()) != l.bias.size()) {
      throw CheckpointError(std::string(what) + ": shape mismatch in layer " + std::to_string(i));
    }
    l.weight = Eigen::Map<const Matrix>(w.data(), l.weight.rows(), l.weight.cols());
    l.bias = Eigen::Map<const Vector>(b.data(), l.bias.size());
  }
}

}  // namespace

std::size_t Denoiser::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void validate(const DenoiserConfig& cfg) {
  if (cfg.n_nodes < 2) throw InvalidArgument("n_nodes must be >= 2");
  if (cfg.time_embed_dim < 0 || cfg.time_embed_dim % 2 != 0) {
    throw InvalidArgument("time_embed_dim must be even and >= 0");
  }
  for (int h : cfg.hidden_sizes) {
    if (h < 1) throw InvalidArgument("hidden sizes must be >= 1");
  }
}

Denoiser init_denoiser(const DenoiserConfig& cfg) {
  validate(cfg);
  Denoiser d;
  d.config = cfg;
  Rng rng(derive_seed({cfg.seed, 0x64656e6fULL}));
  int fan_in = d.input_dim();
  std::vector<int> widths = cfg.hidden_sizes;
  widths.push_back(d.edge_dim());
  for (int out : widths) {
    const double limit = std::sqrt(6.0 / fan_in);
    Dense l{Matrix(out, fan_in), Vector::Zero(out)};
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = rng.uniform(-limit, limit);
    d.layers.push_back(std::move(l));
    fan_in = out;
  }
  return d;
}

OptimizerState init_optimizer(const Denoiser& d, double learning_rate) {
  if (!(learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  OptimizerState opt;
  opt.m = zeros_like(d.layers);
  opt.v = zeros_like(d.layers);
  opt.learning_rate = learning_rate;
  return opt;
}

std::vector<double> time_embedding(int t, int dim) {
  std::vector<double> emb(static_cast<std::size_t>(dim));
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double w = std::pow(10000.0, -static_cast<double>(k) / half);
    emb[static_cast<std::size_t>(k)] = std::sin(t * w);
    emb[static_cast<std::size_t>(half + k)] = std::cos(t * w);
  }
  return emb;
}

Matrix predict_x0_batch(const Denoiser& d, const Matrix& xt, std::span<const int> steps, int T) {
  return forward(d, build_input(d, xt, steps, T)).probs;
}

std::vector<double> predict_x0(const Denoiser& d, std::span<const double> xt, int t, int T) {
  const Matrix row = Eigen::Map<const Matrix>(xt.data(), 1, static_cast<Eigen::Index>(xt.size()));
  const int steps[1] = {t};
  const Matrix p = predict_x0_batch(d, row, steps, T);
  return {p.data(), p.data() + p.size()};
}

double bce_loss(std::span<const double> probs, std::span<const double> x0) {
  if (probs.size() != x0.size() || probs.empty()) throw InvalidArgument("bce_loss shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    s -= x0[i] * std::log(p) + (1.0 - x0[i]) * std::log(1.0 - p);
  }
  return s / static_cast<double>(probs.size());
}

LossAndGradient loss_and_gradient(const Denoiser& d, const Matrix& xt, std::span<const int> steps,
                                  int T, const Matrix& x0) {
  if (x0.rows() != xt.rows() || x0.cols() != xt.cols()) {
    throw InvalidArgument("target shape mismatch");
  }
  const ForwardTrace tr = forward(d, build_input(d, xt, steps, T));
  LossAndGradient out;
  out.loss = bce_loss({tr.probs.data(), static_cast<std::size_t>(tr.probs.size())},
                      {x0.data(), static_cast<std::size_t>(x0.size())});
  out.grad = zeros_like(d.layers);

  const double scale = 1.0 / static_cast<double>(tr.probs.size());
  Matrix dz(tr.probs.rows(), tr.probs.cols());
  for (Eigen::Index k = 0; k < dz.size(); ++k) {
    const double p = tr.probs.data()[k];
    const bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
    dz.data()[k] = clamped ? 0.0 : (p - x0.data()[k]) * scale;
  }
  for (std::size_t l = d.layers.size(); l-- > 0;) {
    out.grad[l].weight = dz.transpose() * tr.act[l];
    out.grad[l].bias = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix dh = dz * d.layers[l].weight;
    const Matrix& z = tr.pre[l - 1];
    for (Eigen::Index k = 0; k < dh.size(); ++k) dh.data()[k] *= silu_grad(z.data()[k]);
    dz = std::move(dh);
  }
  return out;
}

void adam_update(Denoiser& d, OptimizerState& opt, const std::vector<Dense>& grad) {
  if (opt.m.size() != d.layers.size() || grad.size() != d.layers.size()) {
    throw InvalidArgument("optimizer state does not match model");
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  const auto update = [&](double* p, double* m, double* v, const double* g, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) {
      m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g[k];
      v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g[k] * g[k];
      p[k] -= opt.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + opt.epsilon);
    }
  };
  for (std::size_t l = 0; l < d.layers.size(); ++l) {
    update(d.layers[l].weight.data(), opt.m[l].weight.data(), opt.v[l].weight.data(),
           grad[l].weight.data(), d.layers[l].weight.size());
    update(d.layers[l].bias.data(), opt.m[l].bias.data(), opt.v[l].bias.data(),
           grad[l].bias.data(), d.layers[l].bias.size());
  }
}

double train_step(Denoiser& d, OptimizerState& opt, std::span<const Graph> batch,
                  const NoiseSchedule& schedule, const KernelTables& tables, Rng& rng) {
  if (batch.empty()) throw InvalidArgument("empty training batch");
  const int m = d.edge_dim();
  const auto B = static_cast<Eigen::Index>(batch.size());
  Matrix xt(B, m), x0(B, m);
  std::vector<int> steps(batch.size());
  for (Eigen::Index b = 0; b < B; ++b) {
    const Graph& g = batch[static_cast<std::size_t>(b)];
    if (g.n() != d.config.n_nodes) throw InvalidArgument("graph size does not match model");
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(schedule.T)));
    steps[static_cast<std::size_t>(b)] = t;
    const Bits noisy = sample_forward(tables, g.bits(), t, rng);
    for (int k = 0; k < m; ++k) {
      x0(b, k) = g.bits()[static_cast<std::size_t>(k)];
      xt(b, k) = noisy[static_cast<std::size_t>(k)];
    }
  }
  const auto lg = loss_and_gradient(d, xt, steps, schedule.T, x0);
  if (!std::isfinite(lg.loss)) throw TrainingDiverged("non-finite training loss");
  adam_update(d, opt, lg.grad);
  return lg.loss;
}

std::vector<double> flatten(const std::vector<Dense>& layers) {
  std::vector<double> flat;
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void unflatten(std::span<const double> flat, std::vector<Dense>& layers) {
  std::size_t k = 0;
  for (auto& l : layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = flat[k++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = flat[k++];
  }
  if (k != flat.size()) throw InvalidArgument("flat parameter vector has wrong length");
}

void save_checkpoint(const Denoiser& d, const OptimizerState& opt,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"n_nodes", d.config.n_nodes},
                 {"hidden_sizes", d.config.hidden_sizes},
                 {"time_embed_dim", d.config.time_embed_dim},
                 {"seed", d.config.seed}};
  j["layers"] = dense_list_to_json(d.layers);
  j["optimizer"] = {{"step", opt.step},
                    {"learning_rate", opt.learning_rate},
                    {"beta1", opt.beta1},
                    {"beta2", opt.beta2},
                    {"epsilon", opt.epsilon},
                    {"m", dense_list_to_json(opt.m)},
                    {"v", dense_list_to_json(opt.v)}};
  write_file_atomic(path, j.dump() + "\n");
}

std::pair<Denoiser, OptimizerState> load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("unreadable checkpoint " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format") != kCheckpointFormat) throw CheckpointError("not a denoiser checkpoint");
    if (j.at("version") != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());
    }
    DenoiserConfig cfg;
    const auto& c = j.at("config");
    cfg.n_nodes = c.at("n_nodes").get<int>();
    cfg.hidden_sizes = c.at("hidden_sizes").get<std::vector<int>>();
    cfg.time_embed_dim = c.at("time_embed_dim").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    validate(cfg);

    // Shapes come from a fresh init; the values are overwritten below.
    Denoiser d = init_denoiser(cfg);
    dense_list_from_json(j.at("layers"), d.layers, "layers");
    const auto& o = j.at("optimizer");
    OptimizerState opt = init_optimizer(d, o.at("learning_rate").get<double>());
    opt.step = o.at("step").get<std::int64_t>();
    opt.beta1 = o.at("beta1").get<double>();
    opt.beta2 = o.at("beta2").get<double>();
    opt.epsilon = o.at("epsilon").get<double>();
    dense_list_from_json(o.at("m"), opt.m, "optimizer.m");
    dense_list_from_json(o.at("v"), opt.v, "optimizer.v");
    return {std::move(d), std::move(opt)};
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw CheckpointError("invalid checkpoint config: " + std::string(e.what()));
  }
}

std::pair<Denoiser, OptimizerState> load_checkpoint(const std::filesystem::path& path,
                                                    int expected_n_nodes) {
  auto loaded = load_checkpoint(path);
  if (loaded.first.config.n_nodes != expected_n_nodes) {
    throw CheckpointError("checkpoint is for n_nodes = " +
                          std::to_string(loaded.first.config.n_nodes) + ", expected " +
                          std::to_string(expected_n_nodes));
  }
  return loaded;
}

}  // namespace bgd
