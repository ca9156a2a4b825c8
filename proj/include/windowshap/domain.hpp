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

#ifndef WINDOWSHAP_DOMAIN_HPP_
#define WINDOWSHAP_DOMAIN_HPP_

// Core value types: time-series instances, background sets, windows,
// attributions, and the batched predictor contract.
//
// Matrices are variable-major: row i is variable i, column t is time step t.
// All indices are 0-based.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "windowshap/error.hpp"

namespace windowshap {

struct Shape {
  std::size_t variables = 0;
  std::size_t steps = 0;

  std::size_t cells() const { return variables * steps; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Throws kShapeMismatch on ragged input.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Shape shape() const { return {rows_, cols_}; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  std::vector<std::vector<double>> to_rows() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One multivariate time series X in R^{D x L}. Immutable after construction.
class TimeSeriesInstance {
 public:
  // Validates D >= 1, L >= 1, finite values, and D unique variable names.
  static TimeSeriesInstance create(
      Matrix values, std::vector<std::string> variable_names,
      std::optional<std::string> step_duration = std::nullopt);

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& variable_names() const {
    return variable_names_;
  }
  const std::optional<std::string>& step_duration() const {
    return step_duration_;
  }
  Shape shape() const { return values_.shape(); }

  // Same names and metadata, new values of the same shape.
  TimeSeriesInstance with_values(Matrix values) const;

  bool operator==(const TimeSeriesInstance&) const = default;

 private:
  TimeSeriesInstance() = default;

  Matrix values_;
  std::vector<std::string> variable_names_;
  std::optional<std::string> step_duration_;
};

TimeSeriesInstance new_instance(const std::vector<std::vector<double>>& rows,
                                std::vector<std::string> variable_names);

// Reference instances used to realize absent cells.
class BackgroundSet {
 public:
  // Throws kInvalidArgument when empty, kShapeMismatch when heterogeneous.
  explicit BackgroundSet(std::vector<TimeSeriesInstance> instances);

  std::size_t size() const { return instances_.size(); }
  Shape shape() const { return instances_.front().shape(); }
  const TimeSeriesInstance& operator[](std::size_t i) const {
    return instances_[i];
  }
  const std::vector<TimeSeriesInstance>& instances() const {
    return instances_;
  }

 private:
  std::vector<TimeSeriesInstance> instances_;
};

// A set of time steps of one variable.
class Window {
 public:
  // Steps are sorted on construction; throws kInvalidArgument when empty or
  // when a step repeats.
  Window(std::size_t variable, std::vector<std::size_t> time_steps);

  // The contiguous window [start, end).
  static Window range(std::size_t variable, std::size_t start,
                      std::size_t end);

  std::size_t variable() const { return variable_; }
  const std::vector<std::size_t>& time_steps() const { return time_steps_; }
  std::size_t size() const { return time_steps_.size(); }
  std::size_t first() const { return time_steps_.front(); }
  // One past the last step.
  std::size_t last_exclusive() const { return time_steps_.back() + 1; }
  bool contiguous() const {
    return last_exclusive() - first() == time_steps_.size();
  }
  bool contains(std::size_t step) const;

  bool operator==(const Window&) const = default;

 private:
  std::size_t variable_;
  std::vector<std::size_t> time_steps_;
};

// The player set of a game. `partition` records that each variable's windows
// are meant to cover [0, L) exactly.
struct WindowSet {
  std::vector<Window> windows;
  Shape shape;
  bool partition = false;

  std::size_t size() const { return windows.size(); }
};

// Throws OverlappingWindowsError / IncompleteCoverageError, or kShapeMismatch
// when a window references a variable or step outside the declared shape.
void validate_window_set(const WindowSet& ws, bool require_partition);

struct WindowValue {
  Window window;
  double value = 0.0;
};

struct Attribution {
  double base_value = 0.0;
  Matrix point_values;
  std::vector<WindowValue> window_values;
  double prediction = 0.0;
  std::vector<std::string> variable_names;
  // Algorithm name, parameters, seed, efficiency residual, and
  // algorithm-specific diagnostics.
  nlohmann::json meta = nlohmann::json::object();

  // base_value + sum(point_values) - prediction.
  double efficiency_residual() const;
};

// Spreads each window value equally over its cells. Windows must be disjoint.
Matrix distribute_window_values(Shape shape,
                                const std::vector<WindowValue>& values);

// N instances of one shape stored contiguously, instance-major then
// variable-major.
class InstanceBatch {
 public:
  InstanceBatch() = default;
  InstanceBatch(Shape shape, std::size_t count);

  Shape shape() const { return shape_; }
  std::size_t size() const { return count_; }
  void resize(std::size_t count);

  std::span<const double> instance(std::size_t n) const {
    return {data_.data() + n * shape_.cells(), shape_.cells()};
  }
  std::span<double> instance(std::size_t n) {
    return {data_.data() + n * shape_.cells(), shape_.cells()};
  }
  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  void set(std::size_t n, const TimeSeriesInstance& instance);

 private:
  Shape shape_;
  std::size_t count_ = 0;
  std::vector<double> data_;
};

// Opaque batched scorer: N instances in, N scores in [0, 1] out.
// Implementations must be deterministic. Calls on one handle are issued
// sequentially; callers that want parallelism use independent handles.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Shape expected_shape() const = 0;
  virtual std::vector<double> predict(const InstanceBatch& batch) = 0;

  double predict_one(const TimeSeriesInstance& instance);
};

}  // namespace windowshap

#endif  // WINDOWSHAP_DOMAIN_HPP_
