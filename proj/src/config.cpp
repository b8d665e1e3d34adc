#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "bgd/error.hpp"
#include "bgd/harness.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

using nlohmann::json;

// Walks one JSON object, consuming known keys; anything left over is an error.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* take(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = take(key)) out = convert<T>(*v, name(key));
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError(field, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::pair<int, int>>) {
      if (!v.is_array() || v.size() != 2) throw ConfigError(field, "expected [lo, hi]");
      return {convert<int>(v[0], field), convert<int>(v[1], field)};
    } else {
      if (!v.is_array()) throw ConfigError(field, "expected an array");
      T out;
      for (const auto& e : v) out.push_back(convert<typename T::value_type>(e, field));
      return out;
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
void read_opt(Fields& f, const std::string& key, std::optional<T>& out) {
  if (const json* v = f.take(key)) out = Fields::convert<T>(*v, f.name(key));
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

json parse_strict(std::string_view text) {
  std::vector<std::set<std::string>> keys;
  const json::parser_callback_t cb = [&keys](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case json::parse_event_t::object_end:
        keys.pop_back();
        break;
      case json::parse_event_t::key: {
        const auto k = parsed.get<std::string>();
        if (!keys.back().insert(k).second) throw ConfigError(k, "duplicate key");
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text.begin(), text.end(), cb);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

void validate(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  require(d.type == "community_small" || d.type == "sbm" || d.type == "er", "dataset.type",
          "must be one of community_small, sbm, er");
  require(d.count >= 2, "dataset.count", "must be >= 2 (train and reference halves)");
  if (d.n_range) {
    require(d.n_range->first >= 2 && d.n_range->first <= d.n_range->second, "dataset.n_range",
            "need 2 <= lo <= hi");
  } else {
    require(d.n >= 2, "dataset.n", "must be >= 2");
  }
  if (d.type == "community_small") {
    if (d.n_range) {
      const int lowest_even = std::max(4, d.n_range->first + d.n_range->first % 2);
      require(lowest_even <= d.n_range->second, "dataset.n_range",
              "must contain an even value >= 4");
    } else {
      require(d.n >= 4 && d.n % 2 == 0, "dataset.n", "community_small needs an even n >= 4");
    }
  }
  require(in_unit(d.p), "dataset.p", "must lie in [0, 1]");
  require(in_unit(d.p_intra), "dataset.p_intra", "must lie in [0, 1]");
  require(in_unit(d.p_inter), "dataset.p_inter", "must lie in [0, 1]");
  require(d.inter_edge_rate >= 0.0, "dataset.inter_edge_rate", "must be >= 0");
  require(!d.block_sizes.empty(), "dataset.block_sizes", "must be non-empty");
  for (int b : d.block_sizes) require(b >= 1, "dataset.block_sizes", "sizes must be >= 1");
  if (d.block_size_range) {
    require(d.block_size_range->first >= 1 && d.block_size_range->first <= d.block_size_range->second,
            "dataset.block_size_range", "need 1 <= lo <= hi");
  }
  require(d.num_blocks >= 1, "dataset.num_blocks", "must be >= 1");

  const auto& k = c.kernel;
  require(!k.p_grid.empty(), "kernel.p_grid", "must be non-empty");
  for (std::size_t i = 0; i < k.p_grid.size(); ++i) {
    require(in_unit(k.p_grid[i]), "kernel.p_grid", "values must lie in [0, 1]");
    require(i == 0 || k.p_grid[i] > k.p_grid[i - 1], "kernel.p_grid", "must be strictly increasing");
  }
  require(k.scale_c > 0.0 && k.scale_c <= 0.5, "kernel.scale_c", "must lie in (0, 0.5]");
  require(k.T >= 2, "kernel.T", "must be >= 2");
  require(k.ramp_frac > 0.0 && k.ramp_frac <= 1.0, "kernel.ramp_frac", "must lie in (0, 1]");

  require(!c.model.hidden_sizes.empty(), "model.hidden_sizes", "must be non-empty");
  for (int h : c.model.hidden_sizes) require(h >= 1, "model.hidden_sizes", "sizes must be >= 1");
  require(c.model.time_embed_dim >= 0 && c.model.time_embed_dim % 2 == 0, "model.time_embed_dim",
          "must be even and >= 0");

  require(c.train.epochs >= 1, "train.epochs", "must be >= 1");
  require(c.train.batch_size >= 1, "train.batch_size", "must be >= 1");
  require(c.train.learning_rate >= 0.0, "train.learning_rate", "must be >= 0");
  require(c.train.early_probe_epochs >= 1 && c.train.early_probe_epochs <= c.train.epochs,
          "train.early_probe_epochs", "must lie in [1, epochs]");

  require(c.eval.n_generated >= 1, "eval.n_generated", "must be >= 1");
  require(c.eval.mmd.sigma > 0.0, "eval.sigma", "must be > 0");
  require(c.eval.mmd.orbit_sigma > 0.0, "eval.orbit_sigma", "must be > 0");
  require(c.eval.mmd.clustering_bins >= 1, "eval.clustering_bins", "must be >= 1");
  require(c.eval.mmd.spectrum_bins >= 1, "eval.spectrum_bins", "must be >= 1");

  require(!c.seeds.empty(), "seeds", "must be non-empty");
  require(c.workers >= 1, "workers", "must be >= 1");
}

ExperimentConfig parse_config_text(std::string_view text) {
  const json root = parse_strict(text);
  ExperimentConfig c;
  c.kernel.p_grid = default_p_grid();

  Fields top(root, "");
  if (const json* v = top.take("version")) {
    require(Fields::convert<int>(*v, "version") == kConfigVersion, "version",
            "unsupported config version");
  }
  const json* ds = top.take("dataset");
  require(ds != nullptr, "dataset", "missing required field");
  {
    Fields f(*ds, "dataset");
    const json* type = f.take("type");
    require(type != nullptr, "dataset.type", "missing required field");
    c.dataset.type = Fields::convert<std::string>(*type, "dataset.type");
    f.read("count", c.dataset.count);
    f.read("seed", c.dataset.seed);
    f.read("n", c.dataset.n);
    read_opt(f, "n_range", c.dataset.n_range);
    f.read("p", c.dataset.p);
    f.read("p_intra", c.dataset.p_intra);
    f.read("inter_edge_rate", c.dataset.inter_edge_rate);
    f.read("p_inter", c.dataset.p_inter);
    f.read("block_sizes", c.dataset.block_sizes);
    read_opt(f, "block_size_range", c.dataset.block_size_range);
    f.read("num_blocks", c.dataset.num_blocks);
    f.finish();
  }
  if (const json* v = top.take("kernel")) {
    Fields f(*v, "kernel");
    f.read("p_grid", c.kernel.p_grid);
    f.read("scale_c", c.kernel.scale_c);
    f.read("T", c.kernel.T);
    f.read("ramp_frac", c.kernel.ramp_frac);
    f.finish();
  }
  if (const json* v = top.take("model")) {
    Fields f(*v, "model");
    f.read("hidden_sizes", c.model.hidden_sizes);
    f.read("time_embed_dim", c.model.time_embed_dim);
    f.finish();
  }
  if (const json* v = top.take("train")) {
    Fields f(*v, "train");
    f.read("epochs", c.train.epochs);
    f.read("batch_size", c.train.batch_size);
    f.read("learning_rate", c.train.learning_rate);
    f.read("early_probe_epochs", c.train.early_probe_epochs);
    f.finish();
  }
  if (const json* v = top.take("eval")) {
    Fields f(*v, "eval");
    f.read("n_generated", c.eval.n_generated);
    f.read("sigma", c.eval.mmd.sigma);
    f.read("orbit_sigma", c.eval.mmd.orbit_sigma);
    f.read("clustering_bins", c.eval.mmd.clustering_bins);
    f.read("spectrum_bins", c.eval.mmd.spectrum_bins);
    f.read("record_wall_time", c.eval.record_wall_time);
    f.finish();
  }
  top.read("seeds", c.seeds);
  top.read("global_seed", c.global_seed);
  top.read("workers", c.workers);
  if (const json* v = top.take("output_dir")) {
    c.output_dir = Fields::convert<std::string>(*v, "output_dir");
  }
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config_text(text);
}

nlohmann::json ExperimentConfig::to_json() const {
  json ds = {{"type", dataset.type},
             {"count", dataset.count},
             {"seed", dataset.seed},
             {"n", dataset.n},
             {"p", dataset.p},
             {"p_intra", dataset.p_intra},
             {"inter_edge_rate", dataset.inter_edge_rate},
             {"p_inter", dataset.p_inter},
             {"block_sizes", dataset.block_sizes},
             {"num_blocks", dataset.num_blocks}};
  if (dataset.n_range) ds["n_range"] = {dataset.n_range->first, dataset.n_range->second};
  if (dataset.block_size_range) {
    ds["block_size_range"] = {dataset.block_size_range->first, dataset.block_size_range->second};
  }
  return {{"version", kConfigVersion},
          {"dataset", ds},
          {"kernel",
           {{"p_grid", kernel.p_grid},
            {"scale_c", kernel.scale_c},
            {"T", kernel.T},
            {"ramp_frac", kernel.ramp_frac}}},
          {"model", {{"hidden_sizes", model.hidden_sizes}, {"time_embed_dim", model.time_embed_dim}}},
          {"train",
           {{"epochs", train.epochs},
            {"batch_size", train.batch_size},
            {"learning_rate", train.learning_rate},
            {"early_probe_epochs", train.early_probe_epochs}}},
          {"eval",
           {{"n_generated", eval.n_generated},
            {"sigma", eval.mmd.sigma},
            {"orbit_sigma", eval.mmd.orbit_sigma},
            {"clustering_bins", eval.mmd.clustering_bins},
            {"spectrum_bins", eval.mmd.spectrum_bins},
            {"record_wall_time", eval.record_wall_time}}},
          {"seeds", seeds},
          {"global_seed", global_seed},
          {"workers", workers},
          {"output_dir", output_dir.string()}};
}

}  // namespace bgd
