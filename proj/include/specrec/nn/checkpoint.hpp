// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_NN_CHECKPOINT_HPP
#define SPECREC_NN_CHECKPOINT_HPP

#include <cstdint>
#include <memory>
#include <string>

#include "specrec/dataset.hpp"
#include "specrec/nn/unet.hpp"

namespace specrec::nn {

// Self-describing model container: named parameter tensors plus the
// noise-schedule hash and normalization bounds the model was trained
// against. Inference refuses mismatched schedules/normalization.
struct CheckpointMeta {
  std::uint64_t schedule_hash = 0;
  NormalizationSpec normalization;
  UNetConfig config;
};

// atomic: writes path + ".tmp" then renames
void save_checkpoint(const std::string& path, const UNet& model, const CheckpointMeta& meta);

std::unique_ptr<UNet> load_checkpoint(const std::string& path, CheckpointMeta& meta_out);

}  // namespace specrec::nn

#endif  // SPECREC_NN_CHECKPOINT_HPP
