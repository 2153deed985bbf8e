// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_CORPUS_HPP
#define SPECREC_CORPUS_HPP

#include <cstdint>
#include <string>

#include "specrec/config.hpp"
#include "specrec/dataset.hpp"

namespace specrec {

// One synthesized (clean, attacked, mask) triple.
struct SpectrumRecord {
  RssiMap clean;
  RssiMap attacked;   // kind == Attacked; only filled when requested
  AttackMask mask;    // empty when no attack was applied
  std::uint64_t seed = 0;
};

// Deterministic scenario synthesis: everything below derives from
// (cfg, record_seed) through fixed substreams.
SpectrumRecord synthesize_record(const ScenarioConfig& cfg, std::uint64_t record_seed, bool with_attack);

std::uint64_t corpus_record_seed(std::uint64_t base_seed, std::uint64_t index);

// Writes n records plus manifest.txt and the resolved scenario.cfg into
// out_dir. Record i is fully determined by (base_seed, i); regenerating
// the corpus is byte-identical.
Manifest generate_corpus(const ScenarioConfig& cfg, std::uint64_t n, std::uint64_t base_seed,
                         const std::string& out_dir, bool with_attacks);

}  // namespace specrec

#endif  // SPECREC_CORPUS_HPP
