#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bgd/denoiser.hpp"
#include "bgd/error.hpp"
#include "bgd/io.hpp"

using namespace bgd;

namespace {

DenoiserConfig toy_config(std::uint64_t seed) {
  DenoiserConfig c;
  c.n_nodes = 5;
  c.hidden_sizes = {8, 6};
  c.time_embed_dim = 4;
  c.seed = seed;
  return c;
}

Matrix random_bits(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return m;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("init is deterministic per seed") {
  const auto a = init_denoiser(toy_config(1));
  const auto b = init_denoiser(toy_config(1));
  const auto c = init_denoiser(toy_config(2));
  CHECK(flatten(a.layers) == flatten(b.layers));
  CHECK(flatten(a.layers) != flatten(c.layers));
  CHECK(a.layers[0].weight.cols() == 10 + 4);
  CHECK(a.layers.back().weight.rows() == 10);
  for (const auto& l : a.layers) CHECK(l.bias.isZero());
  CHECK_THROWS_AS(init_denoiser({1, {4}, 2, 0}), InvalidArgument);
  CHECK_THROWS_AS(init_denoiser({4, {0}, 2, 0}), InvalidArgument);
}

TEST_CASE("zero hidden path gives one half") {
  auto d = init_denoiser({3, {1}, 2, 0});
  d.layers[0].weight.setZero();
  const std::vector<double> x{0, 0, 0};
  for (double p : predict_x0(d, x, 5, 10)) CHECK(p == 0.5);
}

TEST_CASE("forward pass by hand") {
  // 3 nodes, one hidden unit, 2-dim time embedding [sin t, cos t].
  auto d = init_denoiser({3, {1}, 2, 0});
  d.layers[0].weight << 0.5, -1.0, 0.25, 2.0, -0.5;
  d.layers[0].bias << 0.1;
  d.layers[1].weight << 1.0, -2.0, 0.5;
  d.layers[1].bias << 0.0, 0.3, -0.2;
  const std::vector<double> x{1, 0, 1};
  const int t = 3;
  const double z = 0.5 - 0.0 + 0.25 + 2.0 * std::sin(3.0) - 0.5 * std::cos(3.0) + 0.1;
  const double h = z * sig(z);
  const auto p = predict_x0(d, x, t, 10);
  CHECK(p[0] == doctest::Approx(sig(h)).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(sig(-2.0 * h + 0.3)).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(sig(0.5 * h - 0.2)).epsilon(1e-14));
}

TEST_CASE("predict_x0 range, time dependence, shape errors") {
  const auto d = init_denoiser(toy_config(3));
  Rng rng(4);
  for (int r = 0; r < 20; ++r) {
    std::vector<double> x(10);
    for (auto& v : x) v = rng.bernoulli(0.5);
    for (double p : predict_x0(d, x, 1 + static_cast<int>(rng.below(100)), 100)) {
      CHECK(std::isfinite(p));
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
  const std::vector<double> x(10, 1.0);
  CHECK(predict_x0(d, x, 1, 100) != predict_x0(d, x, 2, 100));
  CHECK_THROWS_AS(predict_x0(d, std::vector<double>(9, 0.0), 1, 100), InvalidArgument);
  CHECK_THROWS_AS(predict_x0(d, x, 0, 100), InvalidArgument);
  CHECK_THROWS_AS(predict_x0(d, x, 101, 100), InvalidArgument);
}

TEST_CASE("time embedding is injective over steps") {
  std::vector<std::vector<double>> seen;
  for (int t = 1; t <= 1000; ++t) {
    const auto e = time_embedding(t, 32);
    for (const auto& s : seen) CHECK(s != e);
    if (t % 50 == 0) seen.push_back(e);
  }
}

TEST_CASE("bce loss") {
  CHECK(bce_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_loss(std::vector<double>{1, 0}, std::vector<double>{1, 0}) < 1e-11);
  CHECK(bce_loss(std::vector<double>{0.9}, std::vector<double>{1}) ==
        doctest::Approx(-std::log(0.9)).epsilon(1e-15));
  CHECK(std::isfinite(bce_loss(std::vector<double>{0.0}, std::vector<double>{1})));
  CHECK_THROWS_AS(bce_loss(std::vector<double>{0.5}, std::vector<double>{1, 0}), InvalidArgument);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(5);
  const double h = 1e-5;
  for (int point = 0; point < 20; ++point) {
    const auto d = init_denoiser(toy_config(100 + static_cast<std::uint64_t>(point)));
    auto perturbed = d;
    // move biases off zero so they are exercised too
    for (auto& l : perturbed.layers)
      for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = rng.uniform(-0.5, 0.5);
    const Matrix xt = random_bits(rng, 3, 10);
    const Matrix x0 = random_bits(rng, 3, 10);
    const std::vector<int> steps{1 + static_cast<int>(rng.below(50)), 7, 50};

    const auto analytic = flatten(loss_and_gradient(perturbed, xt, steps, 50, x0).grad);
    auto params = flatten(perturbed.layers);
    std::vector<double> numeric(params.size());
    auto probe = perturbed;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double keep = params[k];
      params[k] = keep + h;
      unflatten(params, probe.layers);
      const double up = loss_and_gradient(probe, xt, steps, 50, x0).loss;
      params[k] = keep - h;
      unflatten(params, probe.layers);
      const double down = loss_and_gradient(probe, xt, steps, 50, x0).loss;
      params[k] = keep;
      numeric[k] = (up - down) / (2 * h);
    }
    double diff = 0, norm_a = 0, norm_n = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      norm_a += analytic[k] * analytic[k];
      norm_n += numeric[k] * numeric[k];
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(norm_a), std::sqrt(norm_n));
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("train_step") {
  const auto schedule = build_schedule(0.5, 0.5, 50);
  const auto tables = build_tables(schedule);
  Rng grng(6);
  const Graph g = er_sample(5, 0.5, grng);
  const std::vector<Graph> batch(4, g);

  SUBCASE("loss halves on a fixed batch") {
    auto d = init_denoiser(toy_config(7));
    auto opt = init_optimizer(d, 1e-3);
    Rng rng(8);
    std::vector<double> losses;
    for (int s = 0; s < 200; ++s) losses.push_back(train_step(d, opt, batch, schedule, tables, rng));
    double first = 0, last = 0;
    for (int k = 0; k < 10; ++k) {
      first += losses[static_cast<std::size_t>(k)];
      last += losses[losses.size() - 1 - static_cast<std::size_t>(k)];
    }
    CHECK(last <= 0.5 * first);
    CHECK(opt.step == 200);
  }
  SUBCASE("zero learning rate leaves parameters unchanged") {
    auto d = init_denoiser(toy_config(7));
    const auto before = flatten(d.layers);
    auto opt = init_optimizer(d, 0.0);
    Rng rng(8);
    for (int s = 0; s < 5; ++s) train_step(d, opt, batch, schedule, tables, rng);
    CHECK(flatten(d.layers) == before);
  }
  SUBCASE("errors") {
    auto d = init_denoiser(toy_config(7));
    auto opt = init_optimizer(d);
    Rng rng(8);
    CHECK_THROWS_AS(train_step(d, opt, std::vector<Graph>{}, schedule, tables, rng), InvalidArgument);
    CHECK_THROWS_AS(train_step(d, opt, std::vector<Graph>{Graph(4)}, schedule, tables, rng),
                    InvalidArgument);
    d.layers[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_step(d, opt, batch, schedule, tables, rng), TrainingDiverged);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "bgd_ckpt_test";
  std::filesystem::create_directories(dir);
  auto d = init_denoiser(toy_config(9));
  auto opt = init_optimizer(d, 2e-3);
  const auto schedule = build_schedule(0.3, 0.5, 20);
  const auto tables = build_tables(schedule);
  Rng rng(10);
  std::vector<Graph> batch{er_sample(5, 0.5, rng), er_sample(5, 0.5, rng)};
  for (int s = 0; s < 3; ++s) train_step(d, opt, batch, schedule, tables, rng);

  save_checkpoint(d, opt, dir / "ck.json");
  const auto [d2, opt2] = load_checkpoint(dir / "ck.json", 5);
  CHECK(flatten(d2.layers) == flatten(d.layers));
  CHECK(flatten(opt2.m) == flatten(opt.m));
  CHECK(flatten(opt2.v) == flatten(opt.v));
  CHECK(opt2.step == opt.step);
  CHECK(opt2.learning_rate == opt.learning_rate);
  const std::vector<double> probe{1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
  CHECK(predict_x0(d2, probe, 4, 20) == predict_x0(d, probe, 4, 20));

  CHECK_THROWS_AS(load_checkpoint(dir / "ck.json", 6), CheckpointError);
  const auto text = read_file(dir / "ck.json");
  std::ofstream(dir / "trunc.json") << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.json"), CheckpointError);
  auto wrong = text;
  wrong.replace(wrong.find("\"version\":1"), 11, "\"version\":7");
  std::ofstream(dir / "ver.json") << wrong;
  CHECK_THROWS_AS(load_checkpoint(dir / "ver.json"), CheckpointError);
  std::filesystem::remove_all(dir);
}
