// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_DATASET_HPP
#define SPECREC_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specrec/grid.hpp"

namespace specrec {

// dBm -> [0,1] clipping/scaling bounds for model-facing tensors.
struct NormalizationSpec {
  double min_dbm = -110.0;
  double max_dbm = -40.0;

  void validate() const {
    if (!(min_dbm < max_dbm)) throw std::invalid_argument("NormalizationSpec: min_dbm must be < max_dbm");
  }
};

// v -> clamp((v - min) / (max - min), 0, 1)
GridF normalize(const RssiMap& map, const NormalizationSpec& spec);
GridF normalize_values(const GridF& values_dbm, const NormalizationSpec& spec);

// inverse on [min, max]; unit values are clamped to [0, 1] first
GridF denormalize(const GridF& unit, const NormalizationSpec& spec);

// Binary grid container: 12-byte magic + u32 version, u32 rows, u32 cols,
// then row-major payload. Little-endian, values stored as f32, masks as u8.
void save_grid(const std::string& path, const GridF& grid);
GridF load_grid(const std::string& path);
void save_mask(const std::string& path, const GridB& mask);
GridB load_mask(const std::string& path);

struct ManifestRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::string clean_path;
  std::string attacked_path;  // empty when corpus has no attacks
  std::string mask_path;
};

struct Manifest {
  std::uint32_t version = 1;
  std::uint64_t count = 0;
  int rows = 0, cols = 0;
  double cell_size_m = 0.0;
  NormalizationSpec normalization;
  bool with_attacks = false;
  std::vector<ManifestRecord> records;

  void validate() const;
};

void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path);

// Loads every clean grid referenced by the manifest, normalized to [0,1].
std::vector<GridF> load_normalized_clean_set(const std::string& manifest_path);

}  // namespace specrec

#endif  // SPECREC_DATASET_HPP
