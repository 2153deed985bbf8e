// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/dataset.hpp"

#include "specrec/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace specrec {

static_assert(std::endian::native == std::endian::little, "on-disk formats are little-endian");

GridF normalize_values(const GridF& values_dbm, const NormalizationSpec& spec) {
  spec.validate();
  GridF out(values_dbm.rows(), values_dbm.cols());
  const double span = spec.max_dbm - spec.min_dbm;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp((values_dbm[i] - spec.min_dbm) / span, 0.0, 1.0);
  return out;
}

GridF normalize(const RssiMap& map, const NormalizationSpec& spec) {
  return normalize_values(map.values_dbm, spec);
}

GridF denormalize(const GridF& unit, const NormalizationSpec& spec) {
  spec.validate();
  GridF out(unit.rows(), unit.cols());
  const double span = spec.max_dbm - spec.min_dbm;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = spec.min_dbm + std::clamp(unit[i], 0.0, 1.0) * span;
  return out;
}

namespace {

constexpr char kGridMagic[12] = {'S', 'P', 'E', 'C', 'R', 'E', 'C', '.', 'G', 'R', 'I', 'D'};
constexpr char kMaskMagic[12] = {'S', 'P', 'E', 'C', 'R', 'E', 'C', '.', 'M', 'A', 'S', 'K'};
constexpr std::uint32_t kGridVersion = 1;

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
  throw IoError(what + ": " + path);
}

void write_header(std::ofstream& f, const char magic[12], std::uint32_t rows, std::uint32_t cols) {
  f.write(magic, 12);
  f.write(reinterpret_cast<const char*>(&kGridVersion), 4);
  f.write(reinterpret_cast<const char*>(&rows), 4);
  f.write(reinterpret_cast<const char*>(&cols), 4);
}

void read_header(std::ifstream& f, const char magic[12], const std::string& path, std::uint32_t& rows,
                 std::uint32_t& cols) {
  char got[12];
  std::uint32_t version = 0;
  f.read(got, 12);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&rows), 4);
  f.read(reinterpret_cast<char*>(&cols), 4);
  if (!f || std::memcmp(got, magic, 12) != 0) io_fail("bad magic in grid file", path);
  if (version != kGridVersion) io_fail("unsupported grid file version", path);
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) io_fail("corrupt grid header", path);
}

}  // namespace

void save_grid(const std::string& path, const GridF& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open grid file for writing", path);
  write_header(f, kGridMagic, static_cast<std::uint32_t>(grid.rows()), static_cast<std::uint32_t>(grid.cols()));
  std::vector<float> row(grid.cols());
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) row[c] = static_cast<float>(grid.at(r, c));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!f) io_fail("write failed for grid file", path);
}

GridF load_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open grid file", path);
  std::uint32_t rows = 0, cols = 0;
  read_header(f, kGridMagic, path, rows, cols);
  GridF grid(static_cast<int>(rows), static_cast<int>(cols));
  std::vector<float> row(cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!f) io_fail("truncated grid file", path);
    for (std::uint32_t c = 0; c < cols; ++c) grid.at(static_cast<int>(r), static_cast<int>(c)) = row[c];
  }
  return grid;
}

void save_mask(const std::string& path, const GridB& mask) {
  std::ofstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open mask file for writing", path);
  write_header(f, kMaskMagic, static_cast<std::uint32_t>(mask.rows()), static_cast<std::uint32_t>(mask.cols()));
  f.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
  if (!f) io_fail("write failed for mask file", path);
}

GridB load_mask(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open mask file", path);
  std::uint32_t rows = 0, cols = 0;
  read_header(f, kMaskMagic, path, rows, cols);
  GridB mask(static_cast<int>(rows), static_cast<int>(cols));
  f.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
  if (!f) io_fail("truncated mask file", path);
  return mask;
}

void Manifest::validate() const {
  normalization.validate();
  if (count != records.size()) throw IoError("manifest: count does not match record list");
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].index <= records[i - 1].index)
      throw IoError("manifest: record indices must be strictly increasing");
}

void save_manifest(const std::string& path, const Manifest& m) {
  m.validate();
  std::ostringstream out;
  out << "specrec-manifest " << m.version << "\n";
  out << "count " << m.count << "\n";
  out << "rows " << m.rows << "\n";
  out << "cols " << m.cols << "\n";
  out.precision(17);
  out << "cell_size_m " << m.cell_size_m << "\n";
  out << "norm_min_dbm " << m.normalization.min_dbm << "\n";
  out << "norm_max_dbm " << m.normalization.max_dbm << "\n";
  out << "with_attacks " << (m.with_attacks ? 1 : 0) << "\n";
  for (const auto& rec : m.records) {
    out << "record " << rec.index << " " << rec.seed << " clean=" << rec.clean_path;
    if (!rec.attacked_path.empty()) out << " attacked=" << rec.attacked_path << " mask=" << rec.mask_path;
    out << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open manifest for writing", path);
  f << out.str();
  if (!f) io_fail("write failed for manifest", path);
}

Manifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) io_fail("cannot open manifest", path);
  Manifest m;
  std::string line;
  if (!std::getline(f, line)) io_fail("empty manifest", path);
  {
    std::istringstream head(line);
    std::string tag;
    head >> tag >> m.version;
    if (tag != "specrec-manifest" || m.version != 1) io_fail("unrecognized manifest header", path);
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (key == "count") in >> m.count;
    else if (key == "rows") in >> m.rows;
    else if (key == "cols") in >> m.cols;
    else if (key == "cell_size_m") in >> m.cell_size_m;
    else if (key == "norm_min_dbm") in >> m.normalization.min_dbm;
    else if (key == "norm_max_dbm") in >> m.normalization.max_dbm;
    else if (key == "with_attacks") { int v = 0; in >> v; m.with_attacks = v != 0; }
    else if (key == "record") {
      ManifestRecord rec;
      in >> rec.index >> rec.seed;
      std::string field;
      while (in >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) io_fail("malformed manifest record", path);
        const std::string name = field.substr(0, eq), value = field.substr(eq + 1);
        if (name == "clean") rec.clean_path = value;
        else if (name == "attacked") rec.attacked_path = value;
        else if (name == "mask") rec.mask_path = value;
        else io_fail("unknown manifest record field '" + name + "'", path);
      }
      m.records.push_back(std::move(rec));
    } else {
      io_fail("unknown manifest key '" + key + "'", path);
    }
  }
  m.validate();
  return m;
}

std::vector<GridF> load_normalized_clean_set(const std::string& manifest_path) {
  const Manifest m = load_manifest(manifest_path);
  const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<GridF> set;
  set.reserve(m.records.size());
  for (const auto& rec : m.records) {
    GridF dbm = load_grid((dir / rec.clean_path).string());
    set.push_back(normalize_values(dbm, m.normalization));
  }
  return set;
}

}  // namespace specrec
