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

#ifndef WINDOWSHAP_ALGORITHMS_HPP_
#define WINDOWSHAP_ALGORITHMS_HPP_

// Stationary, sliding, and dynamic window explainers. Each maps
// (predictor, instance, background, parameters) to a per-cell Attribution.

#include <cstddef>
#include <cstdint>
#include <string>

#include "windowshap/domain.hpp"
#include "windowshap/shapley_engine.hpp"

namespace windowshap {

struct StationaryParams {
  std::size_t window_len = 1;
  EngineConfig engine;
};

struct SlidingParams {
  std::size_t window_len = 1;
  std::size_t stride = 1;
  EngineConfig engine;
};

struct DynamicParams {
  double delta = 0.0;
  // Total window budget across all variables; must be >= D.
  std::size_t max_windows = 1;
  EngineConfig engine;
};

// One game over D * ceil(L/l) window players. Satisfies local accuracy.
Attribution stationary_windowshap(Predictor& predictor,
                                  const TimeSeriesInstance& x_star,
                                  const BackgroundSet& background,
                                  const StationaryParams& params);

// One inside/outside game per offset of the sliding plan. A cell's value is
// the mean of phi_inside / l over the inside windows covering it, so local
// accuracy holds only approximately; the residual is recorded in meta.
Attribution sliding_windowshap(Predictor& predictor,
                               const TimeSeriesInstance& x_star,
                               const BackgroundSet& background,
                               const SlidingParams& params);

// Starts from one window per variable and repeatedly splits windows with
// |phi| > delta at their midpoint, largest |phi| first (ties by variable then
// start), until none qualifies or max_windows is reached. meta["history"]
// holds the split points of every iteration.
Attribution dynamic_windowshap(Predictor& predictor,
                               const TimeSeriesInstance& x_star,
                               const BackgroundSet& background,
                               const DynamicParams& params);

nlohmann::json engine_config_to_json(const EngineConfig& config);

// Counters recorded in meta["calls"] by the explainers.
CallCounter calls_from_meta(const Attribution& attribution);

// Deterministic per-game seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace windowshap

#endif  // WINDOWSHAP_ALGORITHMS_HPP_
