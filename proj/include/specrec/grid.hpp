// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_GRID_HPP
#define SPECREC_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace specrec {

// Dense row-major rows x cols grid.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("Grid2D: dimensions must be >= 1");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }

  T& at(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  const T& at(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }
  T& operator[](size_t i) { return v_[i]; }
  const T& operator[](size_t i) const { return v_[i]; }

  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  std::vector<T>& values() { return v_; }
  const std::vector<T>& values() const { return v_; }

  bool same_shape(int rows, int cols) const { return rows_ == rows && cols_ == cols; }

  bool operator==(const Grid2D&) const = default;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> v_;
};

using GridF = Grid2D<double>;
using GridB = Grid2D<std::uint8_t>;  // boolean grids; vector<bool> has no data()

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Measurement-plane geometry: cell (r, c) center sits at
// (origin + c*cell_size, origin + r*cell_size, sampling_altitude).
struct GridSpec {
  int rows = 128;
  int cols = 128;
  double cell_size_m = 4.0;
  double origin_x_m = 0.0;
  double origin_y_m = 0.0;
  double sampling_altitude_m = 100.0;

  void validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("GridSpec: rows/cols must be >= 1");
    if (cell_size_m <= 0.0) throw std::invalid_argument("GridSpec: cell_size_m must be > 0");
    if (sampling_altitude_m <= 0.0) throw std::invalid_argument("GridSpec: sampling_altitude_m must be > 0");
  }

  Vec3 cell_center(int r, int c) const {
    return {origin_x_m + c * cell_size_m, origin_y_m + r * cell_size_m, sampling_altitude_m};
  }

  // ground footprint center, useful as a default transmitter position
  Vec3 footprint_center() const {
    return {origin_x_m + (cols - 1) * cell_size_m / 2.0, origin_y_m + (rows - 1) * cell_size_m / 2.0, 0.0};
  }

  bool operator==(const GridSpec&) const = default;
};

enum class MapKind { Clean, Attacked, Reconstructed };

struct RssiMap {
  GridF values_dbm;
  GridSpec grid;
  MapKind kind = MapKind::Clean;
};

struct LosMask {
  GridB states;  // 1 = LoS
};

struct AttackMask {
  GridB attacked;
};

}  // namespace specrec

#endif  // SPECREC_GRID_HPP
