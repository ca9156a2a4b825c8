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


#include "windowshap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace windowshap::render {

namespace {

std::uint8_t channel(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

Rgb diverging_color(double value, double scale) {
  double t = 0.0;
  if (scale > 0.0 && std::isfinite(value)) t = std::clamp(value / scale, -1.0, 1.0);
  return {channel(1.0 + t), channel(1.0 - std::abs(t)), channel(1.0 - t)};
}

std::vector<std::size_t> rank_variables(const Matrix& point_values,
                                        std::size_t top) {
  std::vector<double> total(point_values.rows(), 0.0);
  for (std::size_t i = 0; i < point_values.rows(); ++i)
    for (double v : point_values.row(i)) total[i] += std::abs(v);
  std::vector<std::size_t> order(point_values.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return total[a] > total[b];
  });
  if (order.size() > top) order.resize(top);
  return order;
}

std::string heatmap_svg(const Attribution& attribution,
                        const HeatmapOptions& options) {
  const Matrix& pv = attribution.point_values;
  const auto rows = rank_variables(pv, options.top);
  double scale = 0.0;
  for (std::size_t i : rows)
    for (double v : pv.row(i)) scale = std::max(scale, std::abs(v));

  const std::size_t label_w = 120;
  const std::size_t legend_h = 30;
  const std::size_t cw = options.cell_width;
  const std::size_t ch = options.cell_height;
  const std::size_t width = label_w + pv.cols() * cw + 10;
  const std::size_t height = rows.size() * ch + legend_h + 10;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const std::size_t y = r * ch;
    const std::string name = i < attribution.variable_names.size()
                                 ? attribution.variable_names[i]
                                 : "var" + std::to_string(i);
    out += "<g class=\"row\" data-variable=\"" + std::to_string(i) + "\">\n";
    out += "<text x=\"" + std::to_string(label_w - 4) + "\" y=\"" +
           std::to_string(y + ch * 3 / 4) + "\" text-anchor=\"end\">" +
           escape(name) + "</text>\n";
    for (std::size_t t = 0; t < pv.cols(); ++t) {
      out += "<rect x=\"" + std::to_string(label_w + t * cw) + "\" y=\"" +
             std::to_string(y) + "\" width=\"" + std::to_string(cw) +
             "\" height=\"" + std::to_string(ch) + "\" fill=\"" +
             hex(diverging_color(pv(i, t), scale)) + "\"/>\n";
    }
    out += "</g>\n";
  }
  const std::size_t ly = rows.size() * ch + 8;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", scale);
  out += "<text x=\"" + std::to_string(label_w) + "\" y=\"" +
         std::to_string(ly + 12) + "\">time step 0.." +
         std::to_string(pv.cols() ? pv.cols() - 1 : 0) + ", color scale +/-" +
         buf + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace windowshap::render
