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

#include "windowshap/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "windowshap/windowing.hpp"

namespace windowshap {

nlohmann::json engine_config_to_json(const EngineConfig& config) {
  nlohmann::json j;
  j["mode"] = engine_mode_name(config.mode);
  j["n_samples"] = config.n_samples ? nlohmann::json(*config.n_samples)
                                    : nlohmann::json(nullptr);
  j["exact_threshold"] = config.exact_threshold;
  j["ridge"] = config.ridge;
  return j;
}

CallCounter calls_from_meta(const Attribution& attribution) {
  const auto& calls = attribution.meta.at("calls");
  CallCounter c;
  c.predictor_calls = calls.at("predictor_calls").get<std::size_t>();
  c.instances_scored = calls.at("instances_scored").get<std::size_t>();
  c.peak_bytes_estimate = calls.at("peak_bytes_estimate").get<std::size_t>();
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

nlohmann::json calls_to_json(const CallCounter& c) {
  return {{"predictor_calls", c.predictor_calls},
          {"instances_scored", c.instances_scored},
          {"peak_bytes_estimate", c.peak_bytes_estimate}};
}

void check_shapes(const Predictor& predictor, const TimeSeriesInstance& x,
                  const BackgroundSet& background) {
  if (background.shape() != x.shape() ||
      predictor.expected_shape() != x.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "instance " + to_string(x.shape()) + ", background " +
                    to_string(background.shape()) + " and predictor " +
                    to_string(predictor.expected_shape()) +
                    " shapes disagree");
  }
}

Attribution start_attribution(const TimeSeriesInstance& x,
                              const char* algorithm, nlohmann::json params,
                              std::uint64_t seed) {
  Attribution a;
  a.variable_names = x.variable_names();
  a.meta["algorithm"] = algorithm;
  a.meta["params"] = std::move(params);
  a.meta["seed"] = seed;
  return a;
}

void finish_attribution(Attribution& a, const CallCounter& calls,
                        bool exact_efficiency) {
  a.meta["calls"] = calls_to_json(calls);
  a.meta["efficiency"] = exact_efficiency ? "exact" : "approximate";
  a.meta["efficiency_residual"] = a.efficiency_residual();
}

nlohmann::json split_points_json(const SplitState& state) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < state.variables(); ++i) {
    j.push_back(state.points(i));
  }
  return j;
}

}  // namespace

Attribution stationary_windowshap(Predictor& predictor,
                                  const TimeSeriesInstance& x_star,
                                  const BackgroundSet& background,
                                  const StationaryParams& params) {
  check_shapes(predictor, x_star, background);
  const Shape shape = x_star.shape();
  const WindowSet players =
      stationary_partition(shape.variables, shape.steps, params.window_len);

  Attribution a = start_attribution(
      x_star, "stationary",
      {{"window_len", params.window_len},
       {"engine", engine_config_to_json(params.engine)}},
      params.engine.seed);

  const GameSpec game{predictor, x_star, background, players, params.engine};
  const ShapleyResult r = solve_game(game);

  a.base_value = r.base_value;
  a.prediction = r.full_value;
  a.window_values.reserve(players.size());
  for (std::size_t k = 0; k < players.size(); ++k) {
    a.window_values.push_back({players.windows[k], r.values[k]});
  }
  a.point_values = distribute_window_values(shape, a.window_values);
  a.meta["engine_mode_used"] = engine_mode_name(r.mode_used);
  a.meta["players"] = players.size();
  finish_attribution(a, r.counter, true);
  return a;
}

Attribution sliding_windowshap(Predictor& predictor,
                               const TimeSeriesInstance& x_star,
                               const BackgroundSet& background,
                               const SlidingParams& params) {
  check_shapes(predictor, x_star, background);
  const Shape shape = x_star.shape();
  const SlidingPlan plan =
      sliding_plan(shape.steps, params.window_len, params.stride);
  const std::vector<std::size_t> starts = plan.all_starts();
  const std::size_t l = params.window_len;

  Attribution a = start_attribution(
      x_star, "sliding",
      {{"window_len", l},
       {"stride", params.stride},
       {"engine", engine_config_to_json(params.engine)}},
      params.engine.seed);

  Matrix sum(shape.variables, shape.steps, 0.0);
  Matrix cover(shape.variables, shape.steps, 0.0);
  CallCounter calls;
  nlohmann::json base_values = nlohmann::json::array();
  nlohmann::json modes = nlohmann::json::array();
  double base_total = 0.0;

  for (std::size_t j = 0; j < starts.size(); ++j) {
    const std::size_t start = starts[j];
    WindowSet players;
    players.shape = shape;
    players.partition = true;
    // Index into players.windows of each variable's inside window.
    std::vector<std::size_t> inside(shape.variables);
    for (std::size_t i = 0; i < shape.variables; ++i) {
      inside[i] = players.windows.size();
      players.windows.push_back(Window::range(i, start, start + l));
      std::vector<std::size_t> outside;
      for (std::size_t t = 0; t < shape.steps; ++t) {
        if (t < start || t >= start + l) outside.push_back(t);
      }
      if (!outside.empty()) players.windows.emplace_back(i, std::move(outside));
    }

    EngineConfig config = params.engine;
    config.seed = derive_seed(params.engine.seed, j);
    const GameSpec game{predictor, x_star, background, players, config};
    const ShapleyResult r = solve_game(game);
    calls += r.counter;
    base_values.push_back(r.base_value);
    modes.push_back(engine_mode_name(r.mode_used));
    base_total += r.base_value;
    if (j == 0) a.prediction = r.full_value;

    for (std::size_t i = 0; i < shape.variables; ++i) {
      const double phi = r.values[inside[i]];
      a.window_values.push_back({players.windows[inside[i]], phi});
      for (std::size_t t = start; t < start + l; ++t) {
        sum(i, t) += phi / static_cast<double>(l);
        cover(i, t) += 1.0;
      }
    }
  }

  a.base_value = base_total / static_cast<double>(starts.size());
  a.point_values = Matrix(shape.variables, shape.steps, 0.0);
  for (std::size_t i = 0; i < shape.variables; ++i) {
    for (std::size_t t = 0; t < shape.steps; ++t) {
      a.point_values(i, t) = sum(i, t) / cover(i, t);
    }
  }
  a.meta["offsets"] = plan.offsets;
  a.meta["tail_window"] = plan.tail_window
                              ? nlohmann::json(*plan.tail_window)
                              : nlohmann::json(nullptr);
  a.meta["base_values"] = std::move(base_values);
  a.meta["engine_mode_used"] = std::move(modes);
  finish_attribution(a, calls, false);
  return a;
}

Attribution dynamic_windowshap(Predictor& predictor,
                               const TimeSeriesInstance& x_star,
                               const BackgroundSet& background,
                               const DynamicParams& params) {
  check_shapes(predictor, x_star, background);
  const Shape shape = x_star.shape();
  if (!(params.delta >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
  }
  if (params.max_windows < shape.variables) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_windows " + std::to_string(params.max_windows) +
                    " is below the variable count " +
                    std::to_string(shape.variables));
  }

  Attribution a = start_attribution(
      x_star, "dynamic",
      {{"delta", params.delta},
       {"max_windows", params.max_windows},
       {"engine", engine_config_to_json(params.engine)}},
      params.engine.seed);

  SplitState state(shape.variables, shape.steps);
  CallCounter calls;
  nlohmann::json history = nlohmann::json::array();
  nlohmann::json modes = nlohmann::json::array();
  std::string termination;
  ShapleyResult last;
  WindowSet players;

  for (std::size_t iteration = 0;; ++iteration) {
    players = state.windows();
    EngineConfig config = params.engine;
    config.seed = derive_seed(params.engine.seed, iteration);
    const GameSpec game{predictor, x_star, background, players, config};
    last = solve_game(game);
    calls += last.counter;
    state.set_iterations(iteration + 1);
    history.push_back(split_points_json(state));
    modes.push_back(engine_mode_name(last.mode_used));

    struct Candidate {
      double magnitude;
      std::size_t variable;
      std::size_t start;
    };
    std::vector<Candidate> candidates;
    for (std::size_t k = 0; k < players.size(); ++k) {
      const Window& w = players.windows[k];
      const double magnitude = std::abs(last.values[k]);
      if (magnitude > params.delta && w.size() >= 2) {
        candidates.push_back({magnitude, w.variable(), w.first()});
      }
    }
    if (candidates.empty()) {
      termination = "converged";
      break;
    }
    const std::size_t total = state.total_windows();
    if (total >= params.max_windows) {
      termination = "budget_exhausted";
      break;
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& x, const Candidate& y) {
                if (x.magnitude != y.magnitude) return x.magnitude > y.magnitude;
                if (x.variable != y.variable) return x.variable < y.variable;
                return x.start < y.start;
              });
    const std::size_t splits =
        std::min(candidates.size(), params.max_windows - total);
    for (std::size_t c = 0; c < splits; ++c) {
      const auto& points = state.points(candidates[c].variable);
      const auto it =
          std::lower_bound(points.begin(), points.end(), candidates[c].start);
      state.split(candidates[c].variable,
                  static_cast<std::size_t>(it - points.begin()));
    }
  }

  a.base_value = last.base_value;
  a.prediction = last.full_value;
  a.window_values.reserve(players.size());
  for (std::size_t k = 0; k < players.size(); ++k) {
    a.window_values.push_back({players.windows[k], last.values[k]});
  }
  a.point_values = distribute_window_values(shape, a.window_values);
  a.meta["iterations"] = state.iterations();
  a.meta["termination"] = termination;
  a.meta["budget_exhausted"] = termination == "budget_exhausted";
  a.meta["history"] = std::move(history);
  a.meta["engine_mode_used"] = std::move(modes);
  finish_attribution(a, calls, true);
  return a;
}

}  // namespace windowshap
