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

#include "windowshap/shapley_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "windowshap/kernels.hpp"

namespace windowshap {

CoalitionMask CoalitionMask::from_members(
    std::size_t players, std::span<const std::uint32_t> members) {
  CoalitionMask mask(players);
  for (std::uint32_t p : members) {
    if (p >= players) {
      throw Error(ErrorCode::kInvalidArgument,
                  "coalition member " + std::to_string(p) + " >= M = " +
                      std::to_string(players));
    }
    mask.set(p);
  }
  return mask;
}

std::size_t CoalitionMask::count() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), true));
}

std::vector<std::uint32_t> CoalitionMask::members() const {
  std::vector<std::uint32_t> out;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k]) out.push_back(static_cast<std::uint32_t>(k));
  }
  return out;
}

CallCounter& CallCounter::operator+=(const CallCounter& other) {
  predictor_calls += other.predictor_calls;
  instances_scored += other.instances_scored;
  peak_bytes_estimate =
      std::max(peak_bytes_estimate, other.peak_bytes_estimate);
  return *this;
}

const char* engine_mode_name(EngineMode mode) {
  switch (mode) {
    case EngineMode::kAuto: return "auto";
    case EngineMode::kExact: return "exact";
    case EngineMode::kKernel: return "kernel";
  }
  return "unknown";
}

namespace {

// Hard cap for enumeration regardless of the configured threshold.
constexpr std::size_t kMaxEnumerablePlayers = 30;

// Tracks the bytes held by the large buffers of one game.
class MemoryGauge {
 public:
  void add(std::size_t bytes) {
    current_ += bytes;
    peak_ = std::max(peak_, current_);
  }
  void release(std::size_t bytes) { current_ -= std::min(current_, bytes); }
  std::size_t peak() const { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

// Evaluates v(S) for coalitions given as sorted member lists.
class CoalitionGame {
 public:
  explicit CoalitionGame(const GameSpec& spec)
      : spec_(spec),
        shape_(spec.x_star.shape()),
        composites_(shape_, spec.background.size()) {
    if (spec.background.shape() != shape_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "background shape " + to_string(spec.background.shape()) +
                      " does not match instance shape " + to_string(shape_));
    }
    if (spec.players.shape != shape_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "window set shape " + to_string(spec.players.shape) +
                      " does not match instance shape " + to_string(shape_));
    }
    if (spec.predictor.expected_shape() != shape_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "predictor expects shape " +
                      to_string(spec.predictor.expected_shape()) +
                      ", instance has " + to_string(shape_));
    }
    if (spec.players.size() == 0) {
      throw Error(ErrorCode::kInvalidArgument, "game has no players");
    }
    validate_window_set(spec.players, false);

    player_cells_.reserve(spec.players.size());
    for (const Window& w : spec.players.windows) {
      std::vector<std::uint32_t> cells;
      cells.reserve(w.size());
      for (std::size_t t : w.time_steps()) {
        cells.push_back(
            static_cast<std::uint32_t>(w.variable() * shape_.steps + t));
      }
      player_cells_.push_back(std::move(cells));
    }
    const std::size_t b = spec.background.size();
    background_.resize(b * shape_.cells());
    for (std::size_t i = 0; i < b; ++i) {
      const auto src = spec.background[i].values().flat();
      std::copy(src.begin(), src.end(),
                background_.begin() + static_cast<long>(i * shape_.cells()));
    }
    gauge_.add(2 * background_.size() * sizeof(double));
  }

  std::size_t players() const { return player_cells_.size(); }
  MemoryGauge& gauge() { return gauge_; }

  double value(std::span<const std::uint32_t> members) {
    present_.clear();
    for (std::uint32_t p : members) {
      present_.insert(present_.end(), player_cells_[p].begin(),
                      player_cells_[p].end());
    }
    const auto x = spec_.x_star.values().flat();
    if (spec_.config.serial_kernels) {
      kernels::serial::fill_composites(x, background_, present_,
                                       composites_.flat());
    } else {
      kernels::parallel::fill_composites(x, background_, present_,
                                         composites_.flat());
    }
    std::vector<double> scores;
    try {
      scores = spec_.predictor.predict(composites_);
    } catch (const Error& e) {
      if (error_category(e.code()) == ErrorCategory::kModel) {
        throw Error(e.code(), std::string(e.what()) + " (batch of " +
                                  std::to_string(composites_.size()) +
                                  " composites, coalition size " +
                                  std::to_string(members.size()) + ")");
      }
      throw Error(ErrorCode::kPredictorFailure,
                  std::string(error_code_name(e.code())) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kPredictorFailure,
                  std::string("predictor failed on a batch of ") +
                      std::to_string(composites_.size()) +
                      " composites: " + e.what());
    }
    ++counter_.predictor_calls;
    counter_.instances_scored += composites_.size();
    if (scores.size() != composites_.size()) {
      throw Error(ErrorCode::kPredictorFailure,
                  "predictor returned " + std::to_string(scores.size()) +
                      " scores for " + std::to_string(composites_.size()) +
                      " instances");
    }
    double sum = 0.0;
    for (double s : scores) {
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw Error(ErrorCode::kPredictorFailure,
                    "predictor score " + std::to_string(s) +
                        " outside [0, 1]");
      }
      sum += s;
    }
    return sum / static_cast<double>(scores.size());
  }

  std::vector<std::uint32_t> all_members() const {
    std::vector<std::uint32_t> all(players());
    std::iota(all.begin(), all.end(), 0u);
    return all;
  }

  CallCounter counter() const {
    CallCounter c = counter_;
    c.peak_bytes_estimate = gauge_.peak();
    return c;
  }

 private:
  const GameSpec& spec_;
  Shape shape_;
  InstanceBatch composites_;
  std::vector<double> background_;
  std::vector<std::vector<std::uint32_t>> player_cells_;
  std::vector<std::uint32_t> present_;
  CallCounter counter_;
  MemoryGauge gauge_;
};

std::vector<std::uint32_t> members_of(std::uint64_t mask) {
  std::vector<std::uint32_t> out;
  while (mask != 0) {
    out.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

bool enumerable(std::size_t players) { return players < 63; }

std::size_t proper_coalitions(std::size_t players) {
  if (!enumerable(players)) return std::numeric_limits<std::size_t>::max();
  return (std::size_t{1} << players) - 2;
}

// Kernel mass of all coalitions of size z: C(M, z) * weight(M, z).
double size_mass(std::size_t players, std::size_t z) {
  return static_cast<double>(players - 1) /
         (static_cast<double>(z) * static_cast<double>(players - z));
}

kernels::CoalitionDesign build_design(std::size_t players,
                                      std::size_t budget,
                                      std::uint64_t seed) {
  kernels::CoalitionDesign design;
  design.players = players;
  const std::size_t m = players;
  if (budget >= proper_coalitions(m)) {
    const std::uint64_t full = (std::uint64_t{1} << m) - 1;
    design.members.reserve(full - 1);
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      auto members = members_of(mask);
      design.weights.push_back(shapley_kernel_weight(m, members.size()));
      design.members.push_back(std::move(members));
    }
    return design;
  }

  design.members.reserve(budget);
  const double edge_weight = shapley_kernel_weight(m, 1);
  for (std::uint32_t p = 0; p < m && design.size() < budget; ++p) {
    design.members.push_back({p});
    design.weights.push_back(edge_weight);
  }
  for (std::uint32_t p = 0; p < m && design.size() < budget; ++p) {
    std::vector<std::uint32_t> members;
    members.reserve(m - 1);
    for (std::uint32_t q = 0; q < m; ++q) {
      if (q != p) members.push_back(q);
    }
    design.members.push_back(std::move(members));
    design.weights.push_back(edge_weight);
  }

  const std::size_t remaining = budget - design.size();
  if (remaining == 0 || m < 4) return design;

  std::vector<double> mass;
  for (std::size_t z = 2; z + 2 <= m; ++z) mass.push_back(size_mass(m, z));
  const double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
  const double sample_weight = total_mass / static_cast<double>(remaining);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_size(mass.begin(), mass.end());
  std::vector<std::uint32_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0u);
  std::vector<char> chosen(m);
  for (std::size_t s = 0; s < remaining; ++s) {
    const std::size_t z = pick_size(rng) + 2;
    // Draw the smaller side by a partial Fisher-Yates shuffle.
    const bool draw_complement = 2 * z > m;
    const std::size_t k = draw_complement ? m - z : z;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    std::fill(chosen.begin(), chosen.end(), draw_complement ? 1 : 0);
    for (std::size_t i = 0; i < k; ++i) chosen[perm[i]] = draw_complement ? 0 : 1;
    std::vector<std::uint32_t> members;
    members.reserve(z);
    for (std::uint32_t p = 0; p < m; ++p) {
      if (chosen[p]) members.push_back(p);
    }
    design.members.push_back(std::move(members));
    design.weights.push_back(sample_weight);
  }
  return design;
}

std::size_t design_bytes(const kernels::CoalitionDesign& design) {
  std::size_t bytes = design.size() * 2 * sizeof(double);
  for (const auto& m : design.members) bytes += m.size() * sizeof(std::uint32_t);
  return bytes;
}

}  // namespace

double characteristic_value(const GameSpec& game, const CoalitionMask& mask,
                            CallCounter* counter) {
  CoalitionGame g(game);
  if (mask.size() != g.players()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask has " + std::to_string(mask.size()) + " bits for " +
                    std::to_string(g.players()) + " players");
  }
  const double v = g.value(mask.members());
  if (counter != nullptr) *counter += g.counter();
  return v;
}

ShapleyResult exact_shapley(const GameSpec& game) {
  const std::size_t m = game.players.size();
  const std::size_t limit =
      std::min(game.config.exact_threshold, kMaxEnumerablePlayers);
  if (m > limit) {
    throw Error(ErrorCode::kTooManyPlayers,
                "exact enumeration of " + std::to_string(m) +
                    " players exceeds the threshold of " +
                    std::to_string(limit));
  }
  CoalitionGame g(game);
  const std::uint64_t full = std::uint64_t{1} << m;
  std::vector<double> values(full);
  g.gauge().add(values.size() * sizeof(double));
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    values[mask] = g.value(members_of(mask));
  }
  ShapleyResult result;
  result.values = game.config.serial_kernels
                      ? kernels::serial::exact_shapley_values(values, m)
                      : kernels::parallel::exact_shapley_values(values, m);
  result.base_value = values.front();
  result.full_value = values.back();
  result.counter = g.counter();
  result.mode_used = EngineMode::kExact;
  result.coalitions_evaluated = full;
  return result;
}

double shapley_kernel_weight(std::size_t players, std::size_t size) {
  if (size == 0 || size >= players) {
    throw Error(ErrorCode::kDegenerateCoalition,
                "kernel weight undefined for coalition size " +
                    std::to_string(size) + " of " + std::to_string(players));
  }
  // C(M, z) in floating point; exact for the sizes enumeration can reach.
  double binom = 1.0;
  const std::size_t k = std::min(size, players - size);
  for (std::size_t i = 1; i <= k; ++i) {
    binom = binom * static_cast<double>(players - k + i) /
            static_cast<double>(i);
  }
  return static_cast<double>(players - 1) /
         (binom * static_cast<double>(size) *
          static_cast<double>(players - size));
}

std::size_t default_kernel_samples(std::size_t players) {
  return std::min(proper_coalitions(players), 2 * players + 2048);
}

ShapleyResult kernel_shapley(const GameSpec& game) {
  CoalitionGame g(game);
  const std::size_t m = g.players();
  ShapleyResult result;
  result.mode_used = EngineMode::kKernel;
  result.base_value = g.value({});
  result.full_value = g.value(g.all_members());
  const double total = result.full_value - result.base_value;

  if (m == 1) {
    result.values = {total};
    result.counter = g.counter();
    result.coalitions_evaluated = 2;
    return result;
  }

  const std::size_t budget =
      game.config.n_samples.value_or(default_kernel_samples(m));
  const bool enumerate_all = budget >= proper_coalitions(m);
  if (!enumerate_all && budget < m + 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel budget " + std::to_string(budget) +
                    " is below M + 2 = " + std::to_string(m + 2));
  }

  kernels::CoalitionDesign design =
      build_design(m, budget, game.config.seed);
  g.gauge().add(design_bytes(design));
  design.targets.resize(design.size());
  for (std::size_t s = 0; s < design.size(); ++s) {
    design.targets[s] = g.value(design.members[s]) - result.base_value;
  }

  // Binary Gram (M^2) plus reduced system and its factorization (2 dim^2).
  g.gauge().add((m * m + 2 * (m - 1) * (m - 1)) * sizeof(double));
  const kernels::NormalEquations eq =
      game.config.serial_kernels
          ? kernels::serial::reduced_normal_equations(design, total)
          : kernels::parallel::reduced_normal_equations(design, total);

  const auto dim = static_cast<Eigen::Index>(eq.dim);
  Eigen::MatrixXd gram =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(eq.gram.data(), dim,
                                                       dim);
  gram.diagonal().array() += game.config.ridge;
  const Eigen::Map<const Eigen::VectorXd> rhs(eq.rhs.data(), dim);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double max_pivot = pivots.cwiseAbs().maxCoeff();
  const double min_pivot = pivots.minCoeff();
  if (ldlt.info() != Eigen::Success ||
      min_pivot <= 100.0 * game.config.ridge +
                       1e-13 * std::max(1.0, max_pivot)) {
    throw Error(ErrorCode::kSingularSystem,
                "coalition design is rank-deficient for " +
                    std::to_string(m) + " players with " +
                    std::to_string(design.size()) +
                    " coalitions; raise n_samples");
  }
  const Eigen::VectorXd solution = ldlt.solve(rhs);

  result.values.resize(m);
  double assigned = 0.0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    result.values[static_cast<std::size_t>(j)] = solution[j];
    assigned += solution[j];
  }
  result.values[m - 1] = total - assigned;
  result.counter = g.counter();
  result.coalitions_evaluated = design.size() + 2;
  return result;
}

ShapleyResult solve_game(const GameSpec& game) {
  switch (game.config.mode) {
    case EngineMode::kExact:
      return exact_shapley(game);
    case EngineMode::kKernel:
      return kernel_shapley(game);
    case EngineMode::kAuto:
      break;
  }
  if (game.players.size() <=
      std::min(game.config.exact_threshold, kMaxEnumerablePlayers)) {
    return exact_shapley(game);
  }
  return kernel_shapley(game);
}

std::size_t expected_evaluations(std::size_t players,
                                 const EngineConfig& config) {
  const bool exact =
      config.mode == EngineMode::kExact ||
      (config.mode == EngineMode::kAuto &&
       players <= std::min(config.exact_threshold, kMaxEnumerablePlayers));
  if (exact) return std::size_t{1} << players;
  if (players == 1) return 2;
  const std::size_t budget =
      config.n_samples.value_or(default_kernel_samples(players));
  return std::min(budget, proper_coalitions(players)) + 2;
}

}  // namespace windowshap
