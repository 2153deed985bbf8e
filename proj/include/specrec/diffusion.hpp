// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_DIFFUSION_HPP
#define SPECREC_DIFFUSION_HPP

#include <cstdint>
#include <vector>

#include "specrec/grid.hpp"

namespace specrec {

// DDPM beta/alpha/alpha_bar tables. Index t runs 1..T; index 0 holds the
// alpha_bar_0 = 1 convention.
struct NoiseSchedule {
  int T = 1000;
  std::vector<double> beta;       // beta[0] unused
  std::vector<double> alpha;      // alpha[0] = 1
  std::vector<double> alpha_bar;  // alpha_bar[0] = 1

  static NoiseSchedule linear(int T = 1000, double beta_start = 1e-4, double beta_end = 0.02);

  // FNV-1a over T and the beta table; checkpoints refuse inference when
  // the training-time hash differs.
  std::uint64_t hash() const;
};

struct GuidanceConfig {
  int t_star = 400;        // partial-forward depth (0 disables the round entirely)
  int rounds = 2;          // K
  int lowpass_factor = 4;  // N, must divide the grid dimensions
  bool guidance_enabled = true;

  void validate(int T) const {
    if (t_star < 0 || t_star > T) throw std::invalid_argument("GuidanceConfig: t_star outside [0, T]");
    if (rounds < 1) throw std::invalid_argument("GuidanceConfig: rounds must be >= 1");
    if (lowpass_factor < 1) throw std::invalid_argument("GuidanceConfig: lowpass_factor must be >= 1");
  }
};

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise
GridF forward_sample(const GridF& x0, int t, const GridF& noise, const NoiseSchedule& schedule);

// DDPM posterior step:
//   mu = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t)
//   x_{t-1} = mu + sigma_t * z,  sigma_t^2 = beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t)
// z is ignored at t = 1.
GridF reverse_step(const GridF& x_t, int t, const GridF& eps_hat, const NoiseSchedule& schedule,
                   const GridF& z);

// Area mean over N x N blocks, upsampled back by replication. Idempotent,
// preserves the global mean exactly. N must divide both dimensions.
GridF lowpass(const GridF& grid, int factor);

GridF sample_noise_grid(int rows, int cols, std::uint64_t stream_key);

// epsilon-predictor interface; implemented by the trained U-Net and by
// test stubs.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual GridF predict(const GridF& x_t, int t) const = 0;
};

// Multi-round guided reconstruction. Each round noises the current
// estimate to depth t_star and denoises it back; with guidance enabled the
// low-frequency band is re-anchored after every reverse step to the
// equally-noised attacked input, so the perturbed spectrum steers the
// trajectory while the model regenerates detail. Output clamped to [0,1].
GridF guided_reconstruct(const GridF& y, const NoisePredictor& model, const NoiseSchedule& schedule,
                         const GuidanceConfig& cfg, std::uint64_t seed);

}  // namespace specrec

#endif  // SPECREC_DIFFUSION_HPP
