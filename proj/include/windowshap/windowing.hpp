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

#ifndef WINDOWSHAP_WINDOWING_HPP_
#define WINDOWSHAP_WINDOWING_HPP_

// Window constructions for the three explainers: fixed tilings, sliding
// inside/outside plans, and midpoint split refinement.

#include <cstddef>
#include <optional>
#include <vector>

#include "windowshap/domain.hpp"

namespace windowshap {

// Contiguous windows [k*l, min(L, (k+1)*l)) for k < ceil(L/l), for every
// variable. Throws kInvalidWindowLength unless 1 <= l <= L.
WindowSet stationary_partition(std::size_t variables, std::size_t steps,
                               std::size_t window_len);

struct SlidingPlan {
  std::size_t window_len = 0;
  std::size_t stride = 0;
  // 0, s, ..., (n_w - 1) s with n_w = floor((L - l) / s) + 1.
  std::vector<std::size_t> offsets;
  // L - l, present when the regular offsets leave trailing steps uncovered.
  std::optional<std::size_t> tail_window;

  // Regular offsets followed by the tail window, if any.
  std::vector<std::size_t> all_starts() const;
};

// Throws kInvalidWindowLength, or kInvalidStride for s = 0 and for s > l
// when that would leave gaps between consecutive windows.
SlidingPlan sliding_plan(std::size_t steps, std::size_t window_len,
                         std::size_t stride);

// Per-variable split points; window k of variable i is
// [points[i][k], points[i][k + 1]).
class SplitState {
 public:
  SplitState(std::size_t variables, std::size_t steps);

  std::size_t variables() const { return points_.size(); }
  std::size_t steps() const { return steps_; }
  std::size_t iterations() const { return iterations_; }
  void set_iterations(std::size_t n) { iterations_ = n; }

  const std::vector<std::size_t>& points(std::size_t variable) const {
    return points_[variable];
  }
  std::size_t window_count(std::size_t variable) const {
    return points_[variable].size() - 1;
  }
  std::size_t total_windows() const;

  // Windows ordered by (variable, start).
  WindowSet windows() const;

  // Inserts the midpoint floor((a + b) / 2) of window k = [a, b). Throws
  // kUnsplittableWindow for a length-1 window, kInvalidArgument for an
  // out-of-range variable or window index.
  void split(std::size_t variable, std::size_t k);

 private:
  std::size_t steps_;
  std::vector<std::vector<std::size_t>> points_;
  std::size_t iterations_ = 0;
};

// Value-returning form of SplitState::split.
SplitState split_window(SplitState state, std::size_t variable,
                        std::size_t k);

}  // namespace windowshap

#endif  // WINDOWSHAP_WINDOWING_HPP_
