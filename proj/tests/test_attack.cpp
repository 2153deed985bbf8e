// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "specrec/attack.hpp"
#include "specrec/corpus.hpp"

using namespace specrec;

namespace {
GridSpec grid128() {
  GridSpec g;
  return g;  // defaults: 128x128, 4 m cells, 100 m plane
}
}  // namespace

TEST_CASE("attack mask sampling") {
  const GridSpec grid = grid128();

  AttackMask none = sample_attack_mask(0.0, grid, 1);
  for (size_t i = 0; i < none.attacked.size(); ++i) CHECK(none.attacked[i] == 0);

  AttackMask all = sample_attack_mask(1.0, grid, 1);
  for (size_t i = 0; i < all.attacked.size(); ++i) CHECK(all.attacked[i] == 1);

  SUBCASE("binomial count at p = 0.5") {
    const AttackMask half = sample_attack_mask(0.5, grid, 2);
    long count = 0;
    for (size_t i = 0; i < half.attacked.size(); ++i) count += half.attacked[i];
    CHECK(count >= 8192 - 4 * 64);
    CHECK(count <= 8192 + 4 * 64);
  }

  SUBCASE("deterministic and nested in p") {
    const AttackMask a1 = sample_attack_mask(0.3, grid, 7);
    const AttackMask a2 = sample_attack_mask(0.3, grid, 7);
    CHECK(a1.attacked == a2.attacked);
    // same seed, higher p only adds cells
    const AttackMask b = sample_attack_mask(0.6, grid, 7);
    for (size_t i = 0; i < a1.attacked.size(); ++i)
      if (a1.attacked[i]) CHECK(b.attacked[i] == 1);
  }

  CHECK_THROWS_AS(sample_attack_mask(1.5, grid, 1), std::invalid_argument);
}

TEST_CASE("airborne interference is a constant LoS map") {
  const GridSpec grid = grid128();
  Transmitter tx;
  tx.position_m = grid.footprint_center();
  ChannelParams params;
  AttackScenario scenario;
  scenario.mode = AttackMode::Airborne;

  const GridF inter = interference_map(scenario, tx, grid, params);
  CHECK(inter.at(0, 0) == doctest::Approx(-64.93).epsilon(0.0002));
  for (size_t i = 0; i < inter.size(); ++i) CHECK(inter[i] == inter[0]);
}

TEST_CASE("ground interference follows the full channel model") {
  GridSpec grid = grid128();
  grid.rows = grid.cols = 9;  // small odd grid, jammer below the center cell
  Transmitter tx;
  tx.position_m = grid.footprint_center();
  ChannelParams params;
  params.b_los = 1e9;       // force LoS everywhere above the threshold angle
  params.sf_sigma_db = 0.0;

  AttackScenario scenario;
  scenario.mode = AttackMode::Ground;
  scenario.ground_position_m = grid.footprint_center();

  const GridF inter = interference_map(scenario, tx, grid, params);
  CHECK(inter.at(4, 4) == doctest::Approx(-71.55).epsilon(0.0002));
  // decays away from the jammer
  CHECK(inter.at(0, 0) < inter.at(4, 4));
}

TEST_CASE("ground jammer position derives from the scenario seed") {
  const GridSpec grid = grid128();
  AttackScenario scenario;
  scenario.mode = AttackMode::Ground;
  scenario.seed = 11;
  const Vec3 p1 = resolve_ground_jammer_position(scenario, grid);
  const Vec3 p2 = resolve_ground_jammer_position(scenario, grid);
  CHECK(p1.x == p2.x);
  CHECK(p1.y == p2.y);
  scenario.seed = 12;
  const Vec3 p3 = resolve_ground_jammer_position(scenario, grid);
  CHECK((p1.x != p3.x || p1.y != p3.y));
  scenario.ground_position_m = Vec3{8.0, 12.0, 0.0};
  const Vec3 p4 = resolve_ground_jammer_position(scenario, grid);
  CHECK(p4.x == 8.0);
}

TEST_CASE("power-domain injection") {
  RssiMap clean;
  clean.grid.rows = clean.grid.cols = 2;
  clean.values_dbm = GridF(2, 2, -61.55);
  AttackMask mask;
  mask.attacked = GridB(2, 2, 1);

  SUBCASE("derived example values") {
    GridF inter(2, 2, -64.93);
    const RssiMap out = inject(clean, mask, inter);
    CHECK(out.kind == MapKind::Attacked);
    CHECK(out.values_dbm.at(0, 0) == doctest::Approx(-59.91).epsilon(0.0002));

    clean.values_dbm = GridF(2, 2, -60.0);
    GridF inter2(2, 2, -60.0);
    const RssiMap out2 = inject(clean, mask, inter2);
    CHECK(out2.values_dbm.at(0, 0) == doctest::Approx(-56.9897).epsilon(1e-5));
  }

  SUBCASE("all-false mask is the identity") {
    AttackMask off;
    off.attacked = GridB(2, 2, 0);
    GridF inter(2, 2, 0.0);
    const RssiMap out = inject(clean, off, inter);
    CHECK(out.values_dbm == clean.values_dbm);
  }

  SUBCASE("minus-infinity interference leaves values untouched") {
    GridF inter(2, 2, -std::numeric_limits<double>::infinity());
    const RssiMap out = inject(clean, mask, inter);
    CHECK(out.values_dbm == clean.values_dbm);
  }

  SUBCASE("injection never lowers a value and is monotone in jammer power") {
    GridF lo(2, 2, -70.0), hi(2, 2, -65.0);
    const RssiMap out_lo = inject(clean, mask, lo);
    const RssiMap out_hi = inject(clean, mask, hi);
    for (size_t i = 0; i < clean.values_dbm.size(); ++i) {
      CHECK(out_lo.values_dbm[i] >= clean.values_dbm[i]);
      CHECK(out_hi.values_dbm[i] >= out_lo.values_dbm[i]);
    }
  }

  SUBCASE("dimension mismatch rejected") {
    GridF bad(3, 3, 0.0);
    CHECK_THROWS_AS(inject(clean, mask, bad), std::invalid_argument);
  }
}

TEST_CASE("airborne attacks perturb more than ground attacks on average") {
  ScenarioConfig cfg;
  cfg.attack.attack_probability = 0.5;
  const int seeds = 20;
  double air = 0.0, ground = 0.0;
  long air_n = 0, ground_n = 0;
  for (int s = 0; s < seeds; ++s) {
    for (AttackMode mode : {AttackMode::Ground, AttackMode::Airborne}) {
      ScenarioConfig c = cfg;
      c.attack.mode = mode;
      const SpectrumRecord rec = synthesize_record(c, 5000 + s, true);
      for (size_t i = 0; i < rec.clean.values_dbm.size(); ++i) {
        if (!rec.mask.attacked[i]) continue;
        const double d = std::abs(rec.attacked.values_dbm[i] - rec.clean.values_dbm[i]);
        if (mode == AttackMode::Airborne) {
          air += d;
          ++air_n;
        } else {
          ground += d;
          ++ground_n;
        }
      }
    }
  }
  CHECK(air / air_n >= ground / ground_n);
}
