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

#include "windowshap/windowing.hpp"

#include <algorithm>
#include <string>

namespace windowshap {

namespace {

void check_window_len(std::size_t steps, std::size_t window_len) {
  if (window_len < 1 || window_len > steps) {
    throw Error(ErrorCode::kInvalidWindowLength,
                "window length " + std::to_string(window_len) +
                    " must lie in [1, " + std::to_string(steps) + "]");
  }
}

}  // namespace

WindowSet stationary_partition(std::size_t variables, std::size_t steps,
                               std::size_t window_len) {
  check_window_len(steps, window_len);
  WindowSet ws;
  ws.shape = {variables, steps};
  ws.partition = true;
  const std::size_t per_variable = (steps + window_len - 1) / window_len;
  ws.windows.reserve(variables * per_variable);
  for (std::size_t i = 0; i < variables; ++i) {
    for (std::size_t k = 0; k < per_variable; ++k) {
      ws.windows.push_back(Window::range(
          i, k * window_len, std::min(steps, (k + 1) * window_len)));
    }
  }
  return ws;
}

std::vector<std::size_t> SlidingPlan::all_starts() const {
  std::vector<std::size_t> starts = offsets;
  if (tail_window) starts.push_back(*tail_window);
  return starts;
}

SlidingPlan sliding_plan(std::size_t steps, std::size_t window_len,
                         std::size_t stride) {
  check_window_len(steps, window_len);
  if (stride < 1) {
    throw Error(ErrorCode::kInvalidStride, "stride must be >= 1");
  }
  SlidingPlan plan;
  plan.window_len = window_len;
  plan.stride = stride;
  const std::size_t count = (steps - window_len) / stride + 1;
  for (std::size_t j = 0; j < count; ++j) plan.offsets.push_back(j * stride);
  if (plan.offsets.back() + window_len < steps) {
    plan.tail_window = steps - window_len;
  }
  const bool inner_gap = count > 1 && stride > window_len;
  const bool tail_gap =
      plan.tail_window && *plan.tail_window > plan.offsets.back() + window_len;
  if (inner_gap || tail_gap) {
    throw Error(ErrorCode::kInvalidStride,
                "stride " + std::to_string(stride) + " exceeds window length " +
                    std::to_string(window_len) +
                    " and would leave steps uncovered");
  }
  return plan;
}

SplitState::SplitState(std::size_t variables, std::size_t steps)
    : steps_(steps), points_(variables, std::vector<std::size_t>{0, steps}) {
  if (variables == 0 || steps == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "split state needs D >= 1 and L >= 1");
  }
}

std::size_t SplitState::total_windows() const {
  std::size_t total = 0;
  for (const auto& p : points_) total += p.size() - 1;
  return total;
}

WindowSet SplitState::windows() const {
  WindowSet ws;
  ws.shape = {points_.size(), steps_};
  ws.partition = true;
  ws.windows.reserve(total_windows());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t k = 0; k + 1 < points_[i].size(); ++k) {
      ws.windows.push_back(Window::range(i, points_[i][k], points_[i][k + 1]));
    }
  }
  return ws;
}

void SplitState::split(std::size_t variable, std::size_t k) {
  if (variable >= points_.size() || k >= window_count(variable)) {
    throw Error(ErrorCode::kInvalidArgument,
                "no window " + std::to_string(k) + " for variable " +
                    std::to_string(variable));
  }
  auto& p = points_[variable];
  const std::size_t a = p[k];
  const std::size_t b = p[k + 1];
  if (b - a < 2) {
    throw Error(ErrorCode::kUnsplittableWindow,
                "window [" + std::to_string(a) + ", " + std::to_string(b) +
                    ") of variable " + std::to_string(variable) +
                    " has length 1");
  }
  p.insert(p.begin() + static_cast<long>(k) + 1, (a + b) / 2);
}

SplitState split_window(SplitState state, std::size_t variable,
                        std::size_t k) {
  state.split(variable, k);
  return state;
}

}  // namespace windowshap
