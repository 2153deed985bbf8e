// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/nn/train.hpp"

#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "specrec/nn/checkpoint.hpp"
#include "specrec/rng.hpp"

namespace specrec::nn {

namespace {

struct AdamState {
  std::vector<double> m, v;
  int step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }

  void update(ParamStore& store, const AlignedVec& grad, double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, step);
    const double bc2 = 1.0 - std::pow(beta2, step);
    const double rate = lr * std::sqrt(bc2) / bc1;
    for (Param& p : store.items()) {
      double* theta = p.value.data();
      const size_t off = p.offset, n = p.value.size();
      for (size_t i = 0; i < n; ++i) {
        const double g = grad[off + i];
        m[off + i] = beta1 * m[off + i] + (1.0 - beta1) * g;
        v[off + i] = beta2 * v[off + i] + (1.0 - beta2) * g * g;
        theta[i] -= rate * m[off + i] / (std::sqrt(v[off + i]) + eps);
      }
    }
  }
};

}  // namespace

TrainResult train_denoiser(UNet& model, const std::vector<GridF>& clean_normalized,
                           const NoiseSchedule& schedule, const TrainConfig& cfg,
                           const CheckpointSink* sink, std::ostream* log) {
  cfg.validate();
  if (clean_normalized.empty()) throw std::runtime_error("train_denoiser: empty corpus");
  const int rows = clean_normalized.front().rows();
  const int cols = clean_normalized.front().cols();
  for (const GridF& g : clean_normalized)
    if (!g.same_shape(rows, cols)) throw std::runtime_error("train_denoiser: corpus grids differ in shape");
  const int side = cfg.crop > 0 ? cfg.crop : 0;
  if (side > 0 && (side > rows || side > cols || side % 8 != 0))
    throw std::runtime_error("train_denoiser: crop must be a multiple of 8 within the grid");
  const int th = side > 0 ? side : rows;
  const int tw = side > 0 ? side : cols;
  if (th % 8 != 0 || tw % 8 != 0)
    throw std::runtime_error("train_denoiser: training tiles must be multiples of 8");

  const size_t nparams = model.params().total_size();
  AdamState adam;
  adam.init(nparams);
  std::vector<double> ema;
  if (cfg.ema_decay > 0.0) model.export_flat(ema);

  std::vector<AlignedVec> sample_grads(cfg.batch);
  for (auto& g : sample_grads) g.assign(nparams, 0.0);
  std::vector<double> sample_loss(cfg.batch, 0.0);
  AlignedVec grad_total(nparams, 0.0);

  TrainResult result;
  result.loss_trace.reserve(cfg.steps);
  const std::uint64_t n_records = clean_normalized.size();
  const double numel = static_cast<double>(th) * tw;

  CheckpointMeta meta;
  meta.schedule_hash = schedule.hash();
  meta.config = model.config();
  if (sink) meta.normalization = sink->normalization;

  for (int step = 0; step < cfg.steps; ++step) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < cfg.batch; ++i) {
      try {
      thread_local UNet::Acts acts;
      thread_local Scratch scratch;

      const std::uint64_t skey =
          mix(cfg.seed, kStreamTrain, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(i));
      Rng pick(skey);
      const GridF& map = clean_normalized[pick.uniform_index(n_records)];
      const int t = 1 + static_cast<int>(pick.uniform_index(static_cast<std::uint64_t>(schedule.T)));
      const int r0 = side > 0 ? static_cast<int>(pick.uniform_index(rows - side + 1)) : 0;
      const int c0 = side > 0 ? static_cast<int>(pick.uniform_index(cols - side + 1)) : 0;

      Tensor x_t(1, th, tw), eps(1, th, tw);
      const std::uint64_t nkey = mix(skey, kStreamDiffusion);
      const double a = std::sqrt(schedule.alpha_bar[t]);
      const double b = std::sqrt(1.0 - schedule.alpha_bar[t]);
      for (int r = 0; r < th; ++r) {
        for (int c = 0; c < tw; ++c) {
          Rng cell(nkey, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
          const double e = cell.normal();
          eps.at(0, r, c) = e;
          x_t.at(0, r, c) = a * map.at(r0 + r, c0 + c) + b * e;
        }
      }

      Tensor eps_hat;
      model.forward(x_t, t, eps_hat, acts, scratch);

      double loss = 0.0;
      Tensor g_out(1, th, tw);
      const double gscale = 2.0 / (numel * cfg.batch);
      for (size_t j = 0; j < eps_hat.size(); ++j) {
        const double d = eps_hat.v[j] - eps.v[j];
        loss += d * d;
        g_out.v[j] = gscale * d;
      }
      sample_loss[i] = loss / numel;

      std::memset(sample_grads[i].data(), 0, nparams * sizeof(double));
      model.backward(g_out, acts, sample_grads[i].data(), scratch);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    // fixed-order reduction keeps results independent of thread count
    std::memset(grad_total.data(), 0, nparams * sizeof(double));
    for (int i = 0; i < cfg.batch; ++i) {
      const double* g = sample_grads[i].data();
      for (size_t j = 0; j < nparams; ++j) grad_total[j] += g[j];
    }

    double mean_loss = 0.0;
    for (int i = 0; i < cfg.batch; ++i) mean_loss += sample_loss[i];
    mean_loss /= cfg.batch;
    if (!std::isfinite(mean_loss))
      throw std::runtime_error("train_denoiser: non-finite loss at step " + std::to_string(step));
    result.loss_trace.push_back(mean_loss);

    adam.update(model.params(), grad_total, cfg.lr);

    if (cfg.ema_decay > 0.0) {
      const double d = cfg.ema_decay;
      for (Param& p : model.params().items()) {
        const double* theta = p.value.data();
        double* e = ema.data() + p.offset;
        for (size_t j = 0; j < p.value.size(); ++j) e[j] = d * e[j] + (1.0 - d) * theta[j];
      }
    }

    if (log && cfg.log_every > 0 && (step + 1) % cfg.log_every == 0)
      (*log) << "step " << (step + 1) << "/" << cfg.steps << " loss " << mean_loss << "\n";

    if (sink && cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
        step + 1 < cfg.steps)
      save_checkpoint(sink->path, model, meta);
  }

  if (cfg.ema_decay > 0.0) model.import_flat(ema);
  if (sink) save_checkpoint(sink->path, model, meta);
  return result;
}

}  // namespace specrec::nn
