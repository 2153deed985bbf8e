// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/attack.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "specrec/rng.hpp"

namespace specrec {

AttackMask sample_attack_mask(double p, const GridSpec& grid, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_attack_mask: p outside [0, 1]");
  grid.validate();
  AttackMask mask;
  mask.attacked = GridB(grid.rows, grid.cols, 0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      Rng rng(seed, kStreamAttackMask, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
      mask.attacked.at(r, c) = rng.uniform() < p ? 1 : 0;
    }
  }
  return mask;
}

Vec3 resolve_ground_jammer_position(const AttackScenario& scenario, const GridSpec& grid) {
  if (scenario.ground_position_m) return *scenario.ground_position_m;
  Rng rng(scenario.seed, kStreamJammerPos);
  const int r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(grid.rows)));
  const int c = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(grid.cols)));
  Vec3 pos = grid.cell_center(r, c);
  pos.z = 0.0;
  return pos;
}

GridF interference_map(const AttackScenario& scenario, const Transmitter& tx, const GridSpec& grid,
                       const ChannelParams& params) {
  scenario.validate();
  grid.validate();

  Transmitter jammer = tx;  // carrier frequency shared with the victim link
  jammer.power_dbm = scenario.jammer_power_dbm;

  if (scenario.mode == AttackMode::Airborne) {
    jammer.position_m = {0.0, 0.0, scenario.jammer_altitude_m};
    const double pl = path_loss_db(scenario.standoff_m, params.n_los, jammer, params);
    return GridF(grid.rows, grid.cols, scenario.jammer_power_dbm - pl);
  }

  jammer.position_m = resolve_ground_jammer_position(scenario, grid);
  const std::uint64_t los_seed = mix(scenario.seed, kStreamJammerLos);
  const std::uint64_t sf_seed = mix(scenario.seed, kStreamJammerShadow);
  const LosMask mask = sample_los_mask(jammer, grid, params, los_seed);
  const ShadowField shadow =
      sample_shadow_field(grid.rows, grid.cols, grid.cell_size_m, params.sf_sigma_db, params.sf_dcorr_m, sf_seed);
  const RssiMap map = synthesize_rssi_map(jammer, grid, params, mask, shadow);
  return map.values_dbm;
}

RssiMap inject(const RssiMap& clean, const AttackMask& mask, const GridF& interference_dbm) {
  const int rows = clean.values_dbm.rows(), cols = clean.values_dbm.cols();
  if (!mask.attacked.same_shape(rows, cols) || !interference_dbm.same_shape(rows, cols))
    throw std::invalid_argument("inject: dimension mismatch");

  RssiMap out = clean;
  out.kind = MapKind::Attacked;
  for (size_t i = 0; i < out.values_dbm.size(); ++i) {
    if (!mask.attacked[i]) continue;
    const double v = clean.values_dbm[i];
    const double inter = interference_dbm[i];
    if (inter == -std::numeric_limits<double>::infinity()) continue;
    out.values_dbm[i] = 10.0 * std::log10(std::pow(10.0, v / 10.0) + std::pow(10.0, inter / 10.0));
  }
  return out;
}

}  // namespace specrec
