// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_NN_TRAIN_HPP
#define SPECREC_NN_TRAIN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "specrec/dataset.hpp"
#include "specrec/diffusion.hpp"
#include "specrec/nn/unet.hpp"

namespace specrec::nn {

struct TrainConfig {
  int steps = 30000;
  int batch = 16;
  double lr = 2e-4;
  double ema_decay = 0.999;  // 0 disables EMA
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // 0 = final checkpoint only
  int crop = 0;              // train on random square crops of this size (0 = full maps)
  int log_every = 100;

  void validate() const {
    if (steps < 1 || batch < 1 || lr <= 0.0) throw std::invalid_argument("TrainConfig: invalid values");
    if (ema_decay < 0.0 || ema_decay >= 1.0) throw std::invalid_argument("TrainConfig: ema_decay in [0,1)");
  }
};

struct TrainResult {
  std::vector<double> loss_trace;  // per-step batch-mean epsilon-MSE
};

// Optional checkpoint sink used for cadence + final saves.
struct CheckpointSink {
  std::string path;
  NormalizationSpec normalization;
};

// Standard DDPM objective: t uniform in [1, T], x_t = forward_sample, loss
// = mean((eps - eps_hat)^2). Batch samples run in parallel; gradients are
// reduced in sample order, so results are independent of thread count.
// With EMA enabled the averaged weights are folded into the model after
// the last step. Throws on an empty corpus and on NaN loss.
TrainResult train_denoiser(UNet& model, const std::vector<GridF>& clean_normalized,
                           const NoiseSchedule& schedule, const TrainConfig& cfg,
                           const CheckpointSink* sink = nullptr, std::ostream* log = nullptr);

}  // namespace specrec::nn

#endif  // SPECREC_NN_TRAIN_HPP
