// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_ATTACK_HPP
#define SPECREC_ATTACK_HPP

#include <cstdint>
#include <optional>

#include "specrec/channel.hpp"
#include "specrec/grid.hpp"

namespace specrec {

enum class AttackMode { Ground, Airborne };

struct AttackScenario {
  AttackMode mode = AttackMode::Ground;
  double jammer_power_dbm = 10.0;
  double attack_probability = 0.3;
  // Ground mode; when unset, a uniformly random cell center derived from
  // the scenario seed is used.
  std::optional<Vec3> ground_position_m;
  // Airborne mode: follower keeping a constant 3D standoff from each
  // sampling point, pure LoS propagation.
  double standoff_m = 50.0;
  double jammer_altitude_m = 100.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (attack_probability < 0.0 || attack_probability > 1.0)
      throw std::invalid_argument("AttackScenario: attack_probability outside [0, 1]");
    if (standoff_m <= 0.0) throw std::invalid_argument("AttackScenario: standoff_m must be > 0");
  }
};

// Per-cell Bernoulli(p). Masks are nested in p under a fixed seed: the
// cell's uniform draw is compared against p, so raising p only adds cells.
AttackMask sample_attack_mask(double p, const GridSpec& grid, std::uint64_t seed);

Vec3 resolve_ground_jammer_position(const AttackScenario& scenario, const GridSpec& grid);

// Received interference power per cell, dBm. Ground mode runs the full
// channel model from the jammer position (own LoS mask + shadow field,
// streams keyed off scenario.seed); Airborne mode is LoS path loss at the
// constant standoff, i.e. a flat map.
GridF interference_map(const AttackScenario& scenario, const Transmitter& tx, const GridSpec& grid,
                       const ChannelParams& params);

// Power-domain superposition on attacked cells:
// v' = 10*log10(10^(v/10) + 10^(I/10)).
RssiMap inject(const RssiMap& clean, const AttackMask& mask, const GridF& interference_dbm);

}  // namespace specrec

#endif  // SPECREC_ATTACK_HPP
