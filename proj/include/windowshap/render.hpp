/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef WINDOWSHAP_RENDER_HPP_
#define WINDOWSHAP_RENDER_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "windowshap/domain.hpp"

namespace windowshap::render {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

// Blue for negative, white at zero, red for positive. `scale` is the
// magnitude mapped to full saturation; values beyond it are clamped.
Rgb diverging_color(double value, double scale);

// Variable indices ordered by total |phi| descending (index breaks ties),
// truncated to `top`.
std::vector<std::size_t> rank_variables(const Matrix& point_values,
                                        std::size_t top);

struct HeatmapOptions {
  std::size_t top = 15;
  std::size_t cell_width = 6;
  std::size_t cell_height = 18;
};

std::string heatmap_svg(const Attribution& attribution,
                        const HeatmapOptions& options = {});

}  // namespace windowshap::render

#endif  // WINDOWSHAP_RENDER_HPP_
