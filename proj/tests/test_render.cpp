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


#include <random>
#include <regex>

#include <gtest/gtest.h>

#include "windowshap/render.hpp"

namespace windowshap::render {
namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1))
    ++n;
  return n;
}

Attribution attribution_of(Matrix values) {
  Attribution a;
  for (std::size_t i = 0; i < values.rows(); ++i)
    a.variable_names.push_back("var" + std::to_string(i));
  a.point_values = std::move(values);
  return a;
}

TEST(DivergingColor, MonotoneInValue) {
  const double scale = 2.0;
  Rgb prev = diverging_color(-3.0, scale);
  for (double v = -3.0; v <= 3.0; v += 0.001) {
    const Rgb c = diverging_color(v, scale);
    EXPECT_GE(c.r, prev.r) << v;
    EXPECT_LE(c.b, prev.b) << v;
    EXPECT_GE(int(c.r) - int(c.b), int(prev.r) - int(prev.b)) << v;
    prev = c;
  }
  EXPECT_LT(int(diverging_color(-1.0, scale).r) - int(diverging_color(-1.0, scale).b),
            int(diverging_color(1.0, scale).r) - int(diverging_color(1.0, scale).b));
}

TEST(DivergingColor, CentredAtZero) {
  EXPECT_EQ(diverging_color(0.0, 1.0), (Rgb{255, 255, 255}));
  EXPECT_EQ(diverging_color(0.0, 0.0), (Rgb{255, 255, 255}));
  EXPECT_EQ(diverging_color(5.0, 0.0), (Rgb{255, 255, 255}));
  EXPECT_EQ(diverging_color(1.0, 1.0), (Rgb{255, 0, 0}));
  EXPECT_EQ(diverging_color(-1.0, 1.0), (Rgb{0, 0, 255}));
  EXPECT_EQ(diverging_color(-9.0, 1.0), (Rgb{0, 0, 255}));
}

TEST(RankVariables, ByTotalMagnitude) {
  const Matrix m = Matrix::from_rows({{0.1, 0.1}, {-1, 0}, {0.5, 0.4}, {0, 0}});
  EXPECT_EQ(rank_variables(m, 15), (std::vector<std::size_t>{1, 2, 0, 3}));
  EXPECT_EQ(rank_variables(m, 2), (std::vector<std::size_t>{1, 2}));
}

TEST(Heatmap, AllZerosIsUniformMidScale) {
  const std::string svg = heatmap_svg(attribution_of(Matrix(3, 10, 0.0)));
  EXPECT_EQ(count(svg, "<rect"), 30u);
  EXPECT_EQ(count(svg, "fill=\"#ffffff\""), 30u);
}

TEST(Heatmap, TopRowsOnly) {
  std::mt19937_64 rng(1);
  Matrix m(20, 12);
  for (double& v : m.flat()) v = std::normal_distribution<double>(0, 1)(rng);
  HeatmapOptions options;
  options.top = 15;
  const std::string svg = heatmap_svg(attribution_of(m), options);
  EXPECT_EQ(count(svg, "class=\"row\""), 15u);
  EXPECT_EQ(count(svg, "<rect"), 15u * 12u);
  // Default is also 15.
  EXPECT_EQ(count(heatmap_svg(attribution_of(m)), "class=\"row\""), 15u);
  // Rows appear in ranked order.
  const auto order = rank_variables(m, 15);
  const std::regex row("data-variable=\"(\\d+)\"");
  std::vector<std::size_t> seen;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), row);
       it != std::sregex_iterator(); ++it)
    seen.push_back(std::stoul((*it)[1]));
  EXPECT_EQ(seen, order);
}

TEST(Heatmap, EscapesNames) {
  Attribution a = attribution_of(Matrix(1, 2, 1.0));
  a.variable_names = {"a<b&c"};
  const std::string svg = heatmap_svg(a);
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

}  // namespace
}  // namespace windowshap::render
