// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_RENDER_HPP
#define SPECREC_RENDER_HPP

#include <string>

#include "specrec/dataset.hpp"
#include "specrec/grid.hpp"

namespace specrec {

// 24-bit BMP heatmap. The color scale is pinned to [min_dbm, max_dbm] of
// the normalization spec, so panels rendered from different maps are
// directly comparable. Colormap: viridis-style anchors, linearly
// interpolated. scale repeats each cell scale x scale pixels.
void render_heatmap(const std::string& path, const GridF& values_dbm, const NormalizationSpec& range,
                    int scale = 1);

}  // namespace specrec

#endif  // SPECREC_RENDER_HPP
