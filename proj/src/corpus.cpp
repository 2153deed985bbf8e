// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/corpus.hpp"

#include <cstdio>
#include <filesystem>

#include "specrec/rng.hpp"

namespace specrec {

std::uint64_t corpus_record_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix(base_seed, kStreamCorpus, index);
}

SpectrumRecord synthesize_record(const ScenarioConfig& cfg, std::uint64_t record_seed, bool with_attack) {
  cfg.validate();
  SpectrumRecord rec;
  rec.seed = record_seed;

  Transmitter tx = cfg.tx;
  tx.position_m = cfg.effective_tx_position();

  const LosMask los = sample_los_mask(tx, cfg.grid, cfg.channel, record_seed);
  const ShadowField shadow = sample_shadow_field(cfg.grid.rows, cfg.grid.cols, cfg.grid.cell_size_m,
                                                 cfg.channel.sf_sigma_db, cfg.channel.sf_dcorr_m, record_seed);
  rec.clean = synthesize_rssi_map(tx, cfg.grid, cfg.channel, los, shadow);

  if (with_attack) {
    AttackScenario scenario = cfg.attack;
    scenario.seed = record_seed;
    rec.mask = sample_attack_mask(scenario.attack_probability, cfg.grid, record_seed);
    const GridF interference = interference_map(scenario, tx, cfg.grid, cfg.channel);
    rec.attacked = inject(rec.clean, rec.mask, interference);
  }
  return rec;
}

Manifest generate_corpus(const ScenarioConfig& cfg, std::uint64_t n, std::uint64_t base_seed,
                         const std::string& out_dir, bool with_attacks) {
  if (n < 1) throw std::invalid_argument("generate_corpus: n must be >= 1");
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  Manifest m;
  m.count = n;
  m.rows = cfg.grid.rows;
  m.cols = cfg.grid.cols;
  m.cell_size_m = cfg.grid.cell_size_m;
  m.normalization = cfg.normalization;
  m.with_attacks = with_attacks;
  m.records.reserve(n);

  char name[64];
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t seed = corpus_record_seed(base_seed, i);
    const SpectrumRecord rec = synthesize_record(cfg, seed, with_attacks);

    ManifestRecord entry;
    entry.index = i;
    entry.seed = seed;
    std::snprintf(name, sizeof(name), "clean_%06llu.grid", static_cast<unsigned long long>(i));
    entry.clean_path = name;
    save_grid((dir / name).string(), rec.clean.values_dbm);
    if (with_attacks) {
      std::snprintf(name, sizeof(name), "attacked_%06llu.grid", static_cast<unsigned long long>(i));
      entry.attacked_path = name;
      save_grid((dir / name).string(), rec.attacked.values_dbm);
      std::snprintf(name, sizeof(name), "mask_%06llu.grid", static_cast<unsigned long long>(i));
      entry.mask_path = name;
      save_mask((dir / name).string(), rec.mask.attacked);
    }
    m.records.push_back(std::move(entry));
  }

  save_manifest((dir / "manifest.txt").string(), m);
  save_scenario_config((dir / "scenario.cfg").string(), cfg);
  return m;
}

}  // namespace specrec
