// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_CHANNEL_HPP
#define SPECREC_CHANNEL_HPP

#include <cstdint>

#include "specrec/grid.hpp"
#include "specrec/shadow.hpp"

namespace specrec {

struct Transmitter {
  Vec3 position_m{0.0, 0.0, 0.0};  // ground base station
  double power_dbm = 20.0;
  double frequency_hz = 1.8e9;

  void validate() const {
    if (frequency_hz <= 0.0) throw std::invalid_argument("Transmitter: frequency_hz must be > 0");
  }
};

// Air-to-ground channel constants. LoS probability follows the sigmoid
// P = 1 / (1 + a * exp(-b * (theta - a))) with theta the elevation angle
// in degrees; path loss is log-distance with a free-space intercept at
// ref_distance_m.
struct ChannelParams {
  double a_los = 9.61;
  double b_los = 0.16;
  double n_los = 2.2;
  double n_nlos = 3.8;
  double ref_distance_m = 1.0;
  double sf_sigma_db = 6.0;
  double sf_dcorr_m = 50.0;

  void validate() const {
    if (a_los <= 0.0 || b_los <= 0.0 || n_los <= 0.0 || n_nlos <= 0.0 || ref_distance_m <= 0.0 ||
        sf_sigma_db < 0.0 || sf_dcorr_m <= 0.0)
      throw std::invalid_argument("ChannelParams: all parameters must be positive");
    if (n_nlos < n_los) throw std::invalid_argument("ChannelParams: n_nlos must be >= n_los");
  }
};

constexpr double kSpeedOfLight = 299792458.0;

double distance_3d(const Vec3& a, const Vec3& b);

// Elevation angle from tx towards the sampling-plane cell center, degrees.
// 90 when the cell is directly above the transmitter.
double elevation_angle_deg(const Transmitter& tx, int row, int col, const GridSpec& grid);

// P_LoS(theta); throws std::domain_error outside [0, 90] degrees.
double los_probability(double theta_deg, const ChannelParams& params);

// PL(d) = PL0 + 10 * n * log10(d / d0), PL0 = 20 * log10(4 pi d0 f / c).
// Throws std::domain_error for d < d0.
double path_loss_db(double distance_m, double exponent, const Transmitter& tx, const ChannelParams& params);

double free_space_intercept_db(const Transmitter& tx, const ChannelParams& params);

// Independent per-cell Bernoulli(P_LoS) draws; cell stream keyed on
// (seed, row, col) so synthesis parallelizes without changing results.
LosMask sample_los_mask(const Transmitter& tx, const GridSpec& grid, const ChannelParams& params,
                        std::uint64_t seed);

// Clean map: RSSI = P_tx - PL(d3D, n by mask); NLoS cells additionally
// subtract the shadow-fading sample.
RssiMap synthesize_rssi_map(const Transmitter& tx, const GridSpec& grid, const ChannelParams& params,
                            const LosMask& mask, const ShadowField& shadow);

}  // namespace specrec

#endif  // SPECREC_CHANNEL_HPP
