// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "specrec/rng.hpp"

namespace specrec {

namespace {
constexpr double kRadToDeg = 57.295779513082320876798154814105;
}

double distance_3d(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double elevation_angle_deg(const Transmitter& tx, int row, int col, const GridSpec& grid) {
  if (row < 0 || row >= grid.rows || col < 0 || col >= grid.cols)
    throw std::out_of_range("elevation_angle_deg: cell outside grid");
  const Vec3 cell = grid.cell_center(row, col);
  const double dx = cell.x - tx.position_m.x;
  const double dy = cell.y - tx.position_m.y;
  const double dz = cell.z - tx.position_m.z;
  const double horizontal = std::sqrt(dx * dx + dy * dy);
  if (horizontal == 0.0) return 90.0;
  return std::atan(dz / horizontal) * kRadToDeg;
}

double los_probability(double theta_deg, const ChannelParams& params) {
  if (theta_deg < 0.0 || theta_deg > 90.0)
    throw std::domain_error("los_probability: theta_deg outside [0, 90]");
  return 1.0 / (1.0 + params.a_los * std::exp(-params.b_los * (theta_deg - params.a_los)));
}

double free_space_intercept_db(const Transmitter& tx, const ChannelParams& params) {
  return 20.0 * std::log10(4.0 * M_PI * params.ref_distance_m * tx.frequency_hz / kSpeedOfLight);
}

double path_loss_db(double distance_m, double exponent, const Transmitter& tx, const ChannelParams& params) {
  if (distance_m < params.ref_distance_m)
    throw std::domain_error("path_loss_db: distance below reference distance");
  return free_space_intercept_db(tx, params) +
         10.0 * exponent * std::log10(distance_m / params.ref_distance_m);
}

LosMask sample_los_mask(const Transmitter& tx, const GridSpec& grid, const ChannelParams& params,
                        std::uint64_t seed) {
  grid.validate();
  LosMask mask;
  mask.states = GridB(grid.rows, grid.cols, 0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double p = los_probability(elevation_angle_deg(tx, r, c, grid), params);
      Rng rng(seed, kStreamLosMask, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
      mask.states.at(r, c) = rng.bernoulli(p) ? 1 : 0;
    }
  }
  return mask;
}

RssiMap synthesize_rssi_map(const Transmitter& tx, const GridSpec& grid, const ChannelParams& params,
                            const LosMask& mask, const ShadowField& shadow) {
  grid.validate();
  tx.validate();
  params.validate();
  if (!mask.states.same_shape(grid.rows, grid.cols))
    throw std::invalid_argument("synthesize_rssi_map: mask dimensions do not match grid");
  if (!shadow.values_db.same_shape(grid.rows, grid.cols))
    throw std::invalid_argument("synthesize_rssi_map: shadow dimensions do not match grid");

  RssiMap map;
  map.grid = grid;
  map.kind = MapKind::Clean;
  map.values_dbm = GridF(grid.rows, grid.cols, 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double d = distance_3d(tx.position_m, grid.cell_center(r, c));
      const bool los = mask.states.at(r, c) != 0;
      const double pl = path_loss_db(d, los ? params.n_los : params.n_nlos, tx, params);
      double v = tx.power_dbm - pl;
      if (!los) v -= shadow.values_db.at(r, c);
      map.values_dbm.at(r, c) = v;
    }
  }
  return map;
}

}  // namespace specrec
