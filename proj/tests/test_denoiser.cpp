// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "specrec/nn/checkpoint.hpp"
#include "specrec/nn/layers.hpp"
#include "specrec/nn/train.hpp"
#include "specrec/nn/unet.hpp"
#include "specrec/rng.hpp"

using namespace specrec;
using namespace specrec::nn;

namespace {

UNetConfig mini_config() {
  UNetConfig cfg;
  cfg.base_channels = 8;
  cfg.time_dim = 32;
  return cfg;
}

void fill_normal(Tensor& t, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  for (double& v : t.v) v = scale * rng.normal();
}

// central-difference loss gradient check against a scalar loss functional
template <typename Fwd, typename Bwd>
void check_layer_gradient(ParamStore& store, Tensor& x, Fwd fwd, Bwd bwd, double tol = 1e-5) {
  // loss = sum(w .* y) with fixed random w
  Tensor y = fwd(x);
  Tensor w(y.c, y.h, y.w);
  fill_normal(w, 5150);
  auto loss = [&](Tensor& input) {
    Tensor out = fwd(input);
    double L = 0.0;
    for (size_t i = 0; i < out.size(); ++i) L += w.v[i] * out.v[i];
    return L;
  };

  std::vector<double> gflat(store.total_size(), 0.0);
  Tensor gx(x.c, x.h, x.w);
  bwd(x, w, gx, gflat.data());

  Rng pick(777);
  // parameter gradients
  for (int k = 0; k < 25; ++k) {
    const size_t gi = pick.uniform_index(store.total_size());
    Param* owner = nullptr;
    for (Param& p : store.items())
      if (gi >= p.offset && gi < p.offset + p.value.size()) {
        owner = &p;
        break;
      }
    double& theta = owner->value.v[gi - owner->offset];
    const double h = 1e-6 * (std::abs(theta) + 1.0);
    const double orig = theta;
    theta = orig + h;
    const double lp = loss(x);
    theta = orig - h;
    const double lm = loss(x);
    theta = orig;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(gflat[gi] == doctest::Approx(fd).epsilon(1e-4).scale(std::max(1.0, std::abs(fd))));
  }
  // input gradients
  for (int k = 0; k < 15; ++k) {
    const size_t xi = pick.uniform_index(x.size());
    const double h = 1e-6 * (std::abs(x.v[xi]) + 1.0);
    const double orig = x.v[xi];
    x.v[xi] = orig + h;
    const double lp = loss(x);
    x.v[xi] = orig - h;
    const double lm = loss(x);
    x.v[xi] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(gx.v[xi] == doctest::Approx(fd).epsilon(tol).scale(std::max(1.0, std::abs(fd))));
  }
}

}  // namespace

TEST_CASE("conv2d gradients (3x3 stride 1, 3x3 stride 2, 1x1)") {
  struct Case {
    int k, stride, pad;
  };
  for (const Case cs : {Case{3, 1, 1}, Case{3, 2, 1}, Case{1, 1, 0}}) {
    ParamStore store;
    Conv2d conv;
    conv.build(store, "c", 3, 4, cs.k, cs.stride, cs.pad);
    fill_normal(conv.W->value, 11, 0.5);
    fill_normal(conv.b->value, 12, 0.1);
    Tensor x(3, 6, 6);
    fill_normal(x, 13);
    Scratch s;
    check_layer_gradient(
        store, x,
        [&](Tensor& in) {
          Tensor y;
          conv.forward(in, y, s);
          return y;
        },
        [&](Tensor& in, const Tensor& gy, Tensor& gx, double* gflat) {
          conv.backward(in, gy, &gx, gflat, s);
        });
  }
}

TEST_CASE("group norm gradients") {
  ParamStore store;
  GroupNorm gn;
  gn.build(store, "g", 8, 4);
  fill_normal(gn.gamma->value, 21, 0.3);
  for (double& v : gn.gamma->value.v) v += 1.0;
  fill_normal(gn.beta->value, 22, 0.2);
  Tensor x(8, 5, 5);
  fill_normal(x, 23);
  check_layer_gradient(
      store, x,
      [&](Tensor& in) {
        Tensor y;
        GroupNorm::Cache cache;
        gn.forward(in, y, cache);
        return y;
      },
      [&](Tensor& in, const Tensor& gy, Tensor& gx, double* gflat) {
        Tensor y;
        GroupNorm::Cache cache;
        gn.forward(in, y, cache);
        gn.backward(gy, cache, gx, gflat);
      },
      1e-4);
}

TEST_CASE("attention block gradients") {
  ParamStore store;
  AttentionBlock attn;
  attn.build(store, "a", 8, 4);
  for (Param& p : store.items())
    if (p.name.find(".weight") != std::string::npos) fill_normal(p.value, p.offset + 31, 0.4);
  Tensor x(8, 4, 4);
  fill_normal(x, 33);
  Scratch s;
  check_layer_gradient(
      store, x,
      [&](Tensor& in) {
        Tensor y;
        AttentionBlock::Acts acts;
        attn.forward(in, y, acts, s);
        return y;
      },
      [&](Tensor& in, const Tensor& gy, Tensor& gx, double* gflat) {
        Tensor y;
        AttentionBlock::Acts acts;
        attn.forward(in, y, acts, s);
        attn.backward(gy, acts, gx, gflat, s);
      },
      1e-4);
}

TEST_CASE("miniature model gradient check: 100 parameters within 1e-3") {
  UNet model(mini_config());
  model.init_params(42);
  // give the zero-initialized tensors nonzero values so every path carries
  // gradient signal
  std::uint64_t idx = 50;
  for (Param& p : model.params().items()) {
    ++idx;
    if (p.name.find("conv2.weight") != std::string::npos ||
        p.name.find("proj.weight") != std::string::npos || p.name == "out.conv.weight")
      fill_normal(p.value, idx, 0.05);
  }

  Tensor x(1, 16, 16), target(1, 16, 16);
  fill_normal(x, 60);
  fill_normal(target, 61);
  const int t = 13;

  auto loss = [&]() {
    thread_local UNet::Acts acts;
    thread_local Scratch s;
    Tensor out;
    model.forward(x, t, out, acts, s);
    double L = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
      const double d = out.v[i] - target.v[i];
      L += d * d;
    }
    return L / static_cast<double>(out.size());
  };

  UNet::Acts acts;
  Scratch s;
  Tensor out;
  model.forward(x, t, out, acts, s);
  Tensor g(1, 16, 16);
  for (size_t i = 0; i < out.size(); ++i)
    g.v[i] = 2.0 * (out.v[i] - target.v[i]) / static_cast<double>(out.size());
  std::vector<double> grad(model.params().total_size(), 0.0);
  model.backward(g, acts, grad.data(), s);

  Rng pick(999);
  int checked = 0;
  double worst = 0.0;
  auto& items = model.params().items();
  while (checked < 100) {
    const size_t gi = pick.uniform_index(model.params().total_size());
    Param* owner = nullptr;
    for (Param& p : items)
      if (gi >= p.offset && gi < p.offset + p.value.size()) {
        owner = &p;
        break;
      }
    double& theta = owner->value.v[gi - owner->offset];
    const double h = 1e-5 * (std::abs(theta) + 1.0);
    const double orig = theta;
    theta = orig + h;
    const double lp = loss();
    theta = orig - h;
    const double lm = loss();
    theta = orig;
    const double fd = (lp - lm) / (2.0 * h);
    const double an = grad[gi];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    if (std::abs(fd - an) > 1e-9) CHECK(rel <= 1e-3);
    worst = std::max(worst, rel);
    ++checked;
  }
  MESSAGE("worst relative error: ", worst);
}

TEST_CASE("zero-initialized output projection predicts zero noise") {
  UNet model(mini_config());
  model.init_params(7);
  GridF x(16, 16);
  Rng rng(70);
  for (size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
  const GridF out = model.predict(x, 250);
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);

  SUBCASE("inference is deterministic") {
    UNet warmed(mini_config());
    warmed.init_params(7);
    std::uint64_t idx = 90;
    for (Param& p : warmed.params().items()) fill_normal(p.value, ++idx, 0.05);
    const GridF a = warmed.predict(x, 3);
    const GridF b = warmed.predict(x, 3);
    CHECK(a == b);
  }
}

TEST_CASE("no positional leakage: zero input and zero time path give a constant field") {
  UNet model(mini_config());
  model.init_params(19);
  // randomize every weight, then cut the time path so the conditioning
  // contributes nothing
  std::uint64_t idx = 200;
  for (Param& p : model.params().items())
    if (p.name.find(".weight") != std::string::npos) fill_normal(p.value, ++idx, 0.3);
  for (Param& p : model.params().items())
    if (p.name.rfind("temb.", 0) == 0) p.value.zero();

  const GridF zero(16, 16, 0.0);
  const GridF out = model.predict(zero, 77);
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(out[0]).epsilon(1e-12));
}

TEST_CASE("training contracts") {
  const NoiseSchedule schedule = NoiseSchedule::linear();

  SUBCASE("empty corpus rejected") {
    UNet model(mini_config());
    TrainConfig tc;
    std::vector<GridF> empty;
    CHECK_THROWS_AS(train_denoiser(model, empty, schedule, tc), std::runtime_error);
  }

  SUBCASE("one-sample overfit drives the loss down and conditions on t") {
    UNet model(mini_config());
    model.init_params(3);
    GridF map(16, 16);
    Rng rng(31);
    for (size_t i = 0; i < map.size(); ++i) map[i] = rng.uniform();
    std::vector<GridF> corpus{map};

    TrainConfig tc;
    tc.steps = 200;
    tc.batch = 2;
    tc.seed = 5;
    tc.ema_decay = 0.0;
    tc.log_every = 0;
    const TrainResult result = train_denoiser(model, corpus, schedule, tc);
    REQUIRE(result.loss_trace.size() == 200);
    const double first = std::accumulate(result.loss_trace.begin(), result.loss_trace.begin() + 20, 0.0) / 20;
    const double last = std::accumulate(result.loss_trace.end() - 20, result.loss_trace.end(), 0.0) / 20;
    CHECK(last < first);
    CHECK(last < 0.9);  // beats the zero predictor on unit-variance noise

    // trained time conditioning is live
    GridF x(16, 16);
    for (size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
    const GridF at_t = model.predict(x, 500);
    const GridF at_t1 = model.predict(x, 501);
    CHECK(at_t != at_t1);
  }

  SUBCASE("training is reproducible") {
    std::vector<GridF> corpus;
    Rng rng(41);
    for (int i = 0; i < 3; ++i) {
      GridF g(16, 16);
      for (size_t j = 0; j < g.size(); ++j) g[j] = rng.uniform();
      corpus.push_back(g);
    }
    TrainConfig tc;
    tc.steps = 25;
    tc.batch = 3;
    tc.seed = 8;
    tc.log_every = 0;
    UNet m1(mini_config()), m2(mini_config());
    m1.init_params(9);
    m2.init_params(9);
    const TrainResult r1 = train_denoiser(m1, corpus, schedule, tc);
    const TrainResult r2 = train_denoiser(m2, corpus, schedule, tc);
    CHECK(r1.loss_trace == r2.loss_trace);
    std::vector<double> f1, f2;
    m1.export_flat(f1);
    m2.export_flat(f2);
    CHECK(f1 == f2);
  }

  SUBCASE("non-finite corpus aborts with a diagnostic") {
    UNet model(mini_config());
    model.init_params(3);
    GridF bad(16, 16, std::nan(""));
    std::vector<GridF> corpus{bad};
    TrainConfig tc;
    tc.steps = 2;
    tc.batch = 1;
    tc.log_every = 0;
    CHECK_THROWS_WITH_AS(train_denoiser(model, corpus, schedule, tc),
                         doctest::Contains("non-finite loss"), std::runtime_error);
  }
}

TEST_CASE("checkpoint round trip preserves inference bit-exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "specrec_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  UNet model(mini_config());
  model.init_params(77);
  std::uint64_t idx = 300;
  for (Param& p : model.params().items()) fill_normal(p.value, ++idx, 0.1);

  CheckpointMeta meta;
  meta.schedule_hash = NoiseSchedule::linear().hash();
  meta.normalization.min_dbm = -110.0;
  meta.normalization.max_dbm = -40.0;
  meta.config = model.config();
  save_checkpoint(path, model, meta);

  CheckpointMeta loaded_meta;
  const auto loaded = load_checkpoint(path, loaded_meta);
  CHECK(loaded_meta.schedule_hash == meta.schedule_hash);
  CHECK(loaded_meta.normalization.min_dbm == -110.0);
  CHECK(loaded_meta.config.base_channels == 8);

  GridF x(16, 16);
  Rng rng(123);
  for (size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform();
  CHECK(model.predict(x, 42) == loaded->predict(x, 42));

  std::filesystem::remove_all(dir);
}
