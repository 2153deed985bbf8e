// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_METRICS_HPP
#define SPECREC_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "specrec/config.hpp"
#include "specrec/diffusion.hpp"
#include "specrec/grid.hpp"

namespace specrec {

// Structural similarity on unit-range grids: 11x11 Gaussian window with
// sigma 1.5, K1 = 0.01, K2 = 0.03, data range 1.0, mean over valid window
// positions (no padding).
double ssim(const GridF& a, const GridF& b);

double mse(const GridF& a, const GridF& b);

struct ScenarioCell {
  AttackMode mode = AttackMode::Ground;
  double p = 0.3;
};

struct EvalRow {
  AttackMode mode = AttackMode::Ground;
  double p = 0.0;
  double ssim_attacked = 0.0;
  double ssim_reconstructed = 0.0;
  double improvement_pct = 0.0;
  double mse_attacked = 0.0;
  double mse_reconstructed = 0.0;
  int seed_count = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double min_improvement_pct = 0.0;
  double max_improvement_pct = 0.0;
  double mean_improvement_pct = 0.0;
};

// {Ground, Airborne} x {0.3, 0.4, 0.5, 0.6, 0.7}
std::vector<ScenarioCell> default_scenario_cells();

// Runs each scenario over seeds_per_scenario evaluation seeds and averages
// per-seed metrics. Evaluation seed i is shared across scenarios
// (common-random-numbers pairing), so attack masks are nested in p and
// cross-mode comparisons see the same clean map.
EvalReport evaluate_scenarios(const NoisePredictor& model, const ScenarioConfig& base,
                              const std::vector<ScenarioCell>& scenarios, int seeds_per_scenario,
                              const NoiseSchedule& schedule, const GuidanceConfig& diffusion_cfg,
                              std::uint64_t base_seed);

std::string eval_report_table(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);

}  // namespace specrec

#endif  // SPECREC_METRICS_HPP
