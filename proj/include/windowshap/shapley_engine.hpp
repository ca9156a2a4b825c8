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

#ifndef WINDOWSHAP_SHAPLEY_ENGINE_HPP_
#define WINDOWSHAP_SHAPLEY_ENGINE_HPP_

// Shapley values of an arbitrary set of window players against a black-box
// predictor, either by enumerating every coalition or by Shapley-kernel
// weighted least squares over sampled coalitions.
//
// The characteristic function uses background substitution: for a
// coalition S, each background instance is copied and every cell owned by a
// player in S is overwritten with the explained instance's value; v(S) is
// the mean score over those composites.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "windowshap/domain.hpp"

namespace windowshap {

class CoalitionMask {
 public:
  explicit CoalitionMask(std::size_t players, bool present = false)
      : bits_(players, present) {}
  static CoalitionMask from_members(std::size_t players,
                                    std::span<const std::uint32_t> members);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t k) const { return bits_[k]; }
  void set(std::size_t k, bool present = true) { bits_[k] = present; }
  std::size_t count() const;
  std::vector<std::uint32_t> members() const;

 private:
  std::vector<bool> bits_;
};

struct CallCounter {
  std::size_t predictor_calls = 0;
  std::size_t instances_scored = 0;
  // Largest estimated working set of any single game, in bytes.
  std::size_t peak_bytes_estimate = 0;

  CallCounter& operator+=(const CallCounter& other);
};

enum class EngineMode { kAuto, kExact, kKernel };

const char* engine_mode_name(EngineMode mode);

struct EngineConfig {
  EngineMode mode = EngineMode::kAuto;
  // Kernel budget; default_kernel_samples(M) when unset.
  std::optional<std::size_t> n_samples;
  std::uint64_t seed = 0;
  std::size_t exact_threshold = 12;
  double ridge = 1e-10;
  // Route the inner loops through the serial reference kernels.
  bool serial_kernels = false;
};

struct GameSpec {
  Predictor& predictor;
  const TimeSeriesInstance& x_star;
  const BackgroundSet& background;
  const WindowSet& players;
  EngineConfig config;
};

struct ShapleyResult {
  // v(empty): mean score of the raw background.
  double base_value = 0.0;
  // v(all players).
  double full_value = 0.0;
  std::vector<double> values;
  CallCounter counter;
  // kExact or kKernel.
  EngineMode mode_used = EngineMode::kExact;
  std::size_t coalitions_evaluated = 0;
};

double characteristic_value(const GameSpec& game, const CoalitionMask& mask,
                            CallCounter* counter = nullptr);

// Enumerates all 2^M coalitions. Throws kTooManyPlayers when M exceeds the
// configured exact threshold.
ShapleyResult exact_shapley(const GameSpec& game);

// (M - 1) / (C(M, z) * z * (M - z)). Throws kDegenerateCoalition for
// z = 0 or z = M.
double shapley_kernel_weight(std::size_t players, std::size_t size);

// min(2^M - 2, 2M + 2048).
std::size_t default_kernel_samples(std::size_t players);

// Efficiency-constrained kernel regression. Enumerates every proper
// coalition when the budget reaches 2^M - 2. Throws kSingularSystem when the
// sampled design cannot identify all coefficients.
ShapleyResult kernel_shapley(const GameSpec& game);

// Dispatches on config.mode; kAuto picks exact when M <= exact_threshold.
ShapleyResult solve_game(const GameSpec& game);

// Characteristic evaluations (= predictor calls) solve_game will issue.
std::size_t expected_evaluations(std::size_t players,
                                 const EngineConfig& config);

}  // namespace windowshap

#endif  // WINDOWSHAP_SHAPLEY_ENGINE_HPP_
