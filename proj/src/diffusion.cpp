// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specrec/rng.hpp"

namespace specrec {

NoiseSchedule NoiseSchedule::linear(int T, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("NoiseSchedule: T must be >= 1");
  if (!(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0))
    throw std::invalid_argument("NoiseSchedule: require 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta.assign(T + 1, 0.0);
  s.alpha.assign(T + 1, 1.0);
  s.alpha_bar.assign(T + 1, 1.0);
  for (int t = 1; t <= T; ++t) {
    s.beta[t] = T == 1 ? beta_start : beta_start + (beta_end - beta_start) * (t - 1) / double(T - 1);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

std::uint64_t NoiseSchedule::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  feed(&T, sizeof(T));
  for (int t = 1; t <= T; ++t) feed(&beta[t], sizeof(double));
  return h;
}

GridF forward_sample(const GridF& x0, int t, const GridF& noise, const NoiseSchedule& schedule) {
  if (t < 0 || t > schedule.T) throw std::out_of_range("forward_sample: t outside [0, T]");
  if (!noise.same_shape(x0.rows(), x0.cols()))
    throw std::invalid_argument("forward_sample: noise dimensions do not match");
  const double a = std::sqrt(schedule.alpha_bar[t]);
  const double b = std::sqrt(1.0 - schedule.alpha_bar[t]);
  GridF out(x0.rows(), x0.cols());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * noise[i];
  return out;
}

GridF reverse_step(const GridF& x_t, int t, const GridF& eps_hat, const NoiseSchedule& schedule,
                   const GridF& z) {
  if (t < 1 || t > schedule.T) throw std::out_of_range("reverse_step: t outside [1, T]");
  if (!eps_hat.same_shape(x_t.rows(), x_t.cols()) || !z.same_shape(x_t.rows(), x_t.cols()))
    throw std::invalid_argument("reverse_step: dimension mismatch");
  const double beta_t = schedule.beta[t];
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha[t]);
  const double eps_coef = beta_t / std::sqrt(1.0 - schedule.alpha_bar[t]);
  const double sigma =
      t == 1 ? 0.0 : std::sqrt(beta_t * (1.0 - schedule.alpha_bar[t - 1]) / (1.0 - schedule.alpha_bar[t]));
  GridF out(x_t.rows(), x_t.cols());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = inv_sqrt_alpha * (x_t[i] - eps_coef * eps_hat[i]) + sigma * z[i];
  return out;
}

GridF lowpass(const GridF& grid, int factor) {
  if (factor < 1) throw std::invalid_argument("lowpass: factor must be >= 1");
  if (factor == 1) return grid;
  const int rows = grid.rows(), cols = grid.cols();
  if (rows % factor != 0 || cols % factor != 0)
    throw std::invalid_argument("lowpass: factor must divide grid dimensions");
  GridF out(rows, cols);
  const double inv = 1.0 / (double(factor) * factor);
  for (int br = 0; br < rows; br += factor) {
    for (int bc = 0; bc < cols; bc += factor) {
      double sum = 0.0;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c) sum += grid.at(br + r, bc + c);
      const double mean = sum * inv;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c) out.at(br + r, bc + c) = mean;
    }
  }
  return out;
}

GridF sample_noise_grid(int rows, int cols, std::uint64_t stream_key) {
  GridF out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Rng rng(stream_key, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
      out.at(r, c) = rng.normal();
    }
  }
  return out;
}

GridF guided_reconstruct(const GridF& y, const NoisePredictor& model, const NoiseSchedule& schedule,
                         const GuidanceConfig& cfg, std::uint64_t seed) {
  cfg.validate(schedule.T);
  const int rows = y.rows(), cols = y.cols();
  if (cfg.guidance_enabled && (rows % cfg.lowpass_factor != 0 || cols % cfg.lowpass_factor != 0))
    throw std::invalid_argument("guided_reconstruct: lowpass factor must divide grid dimensions");

  GridF x = y;
  const GridF zero(rows, cols, 0.0);
  for (int round = 0; round < cfg.rounds; ++round) {
    if (cfg.t_star == 0) continue;
    const std::uint64_t rkey = mix(seed, kStreamDiffusion, static_cast<std::uint64_t>(round));
    x = forward_sample(x, cfg.t_star, sample_noise_grid(rows, cols, mix(rkey, kStreamDiffusion)), schedule);
    for (int t = cfg.t_star; t >= 1; --t) {
      const GridF eps_hat = model.predict(x, t);
      const GridF& z = t == 1 ? zero
                              : sample_noise_grid(rows, cols, mix(rkey, kStreamReverse,
                                                                  static_cast<std::uint64_t>(t)));
      x = reverse_step(x, t, eps_hat, schedule, z);
      if (cfg.guidance_enabled) {
        const GridF y_noised = forward_sample(
            y, t - 1, sample_noise_grid(rows, cols, mix(rkey, kStreamGuide, static_cast<std::uint64_t>(t))),
            schedule);
        const GridF low_x = lowpass(x, cfg.lowpass_factor);
        const GridF low_y = lowpass(y_noised, cfg.lowpass_factor);
        for (size_t i = 0; i < x.size(); ++i) x[i] += low_y[i] - low_x[i];
      }
    }
  }
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
  return x;
}

}  // namespace specrec
