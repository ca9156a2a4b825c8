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

#include "windowshap/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace windowshap {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDuplicateVariableName: return "DuplicateVariableName";
    case ErrorCode::kOverlappingWindows: return "OverlappingWindows";
    case ErrorCode::kIncompleteCoverage: return "IncompleteCoverage";
    case ErrorCode::kInvalidWindowLength: return "InvalidWindowLength";
    case ErrorCode::kInvalidStride: return "InvalidStride";
    case ErrorCode::kUnsplittableWindow: return "UnsplittableWindow";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTooManyPlayers: return "TooManyPlayers";
    case ErrorCode::kDegenerateCoalition: return "DegenerateCoalition";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kPredictorFailure: return "PredictorFailure";
    case ErrorCode::kConnectionFailure: return "ConnectionFailure";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPredictorFailure:
    case ErrorCode::kConnectionFailure:
    case ErrorCode::kProtocolViolation:
    case ErrorCode::kTimeout:
      return ErrorCategory::kModel;
    case ErrorCode::kIo:
    case ErrorCode::kParse:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kConfig;
  }
}

OverlappingWindowsError::OverlappingWindowsError(std::size_t variable,
                                                 std::size_t step)
    : Error(ErrorCode::kOverlappingWindows,
            "windows of variable " + std::to_string(variable) +
                " overlap at step " + std::to_string(step)),
      variable_(variable),
      step_(step) {}

namespace {

std::string join_steps(const std::vector<std::size_t>& steps) {
  std::ostringstream out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out << ",";
    out << steps[i];
  }
  return out.str();
}

}  // namespace

IncompleteCoverageError::IncompleteCoverageError(
    std::size_t variable, std::vector<std::size_t> missing_steps)
    : Error(ErrorCode::kIncompleteCoverage,
            "windows of variable " + std::to_string(variable) +
                " do not cover steps {" + join_steps(missing_steps) + "}"),
      variable_(variable),
      missing_steps_(std::move(missing_steps)) {}

std::string to_string(const Shape& shape) {
  return std::to_string(shape.variables) + "x" + std::to_string(shape.steps);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kShapeMismatch,
                "matrix data has " + std::to_string(data_.size()) +
                    " entries, expected " + std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      throw Error(ErrorCode::kShapeMismatch,
                  "row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " columns, expected " +
                      std::to_string(c));
    }
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
  return Matrix(r, c, std::move(data));
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r].assign(row(r).begin(), row(r).end());
  }
  return out;
}

TimeSeriesInstance TimeSeriesInstance::create(
    Matrix values, std::vector<std::string> variable_names,
    std::optional<std::string> step_duration) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "instance must have D >= 1 and L >= 1, got " +
                    to_string(values.shape()));
  }
  if (variable_names.size() != values.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(variable_names.size()) +
                    " variable names for " + std::to_string(values.rows()) +
                    " variables");
  }
  std::set<std::string> seen;
  for (const auto& name : variable_names) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kDuplicateVariableName,
                  "duplicate variable name '" + name + "'");
    }
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t t = 0; t < values.cols(); ++t) {
      if (!std::isfinite(values(i, t))) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "non-finite value at (" + std::to_string(i) + ", " +
                        std::to_string(t) + ")");
      }
    }
  }
  TimeSeriesInstance out;
  out.values_ = std::move(values);
  out.variable_names_ = std::move(variable_names);
  out.step_duration_ = std::move(step_duration);
  return out;
}

TimeSeriesInstance TimeSeriesInstance::with_values(Matrix values) const {
  if (values.shape() != shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "replacement values have shape " + to_string(values.shape()) +
                    ", expected " + to_string(shape()));
  }
  return create(std::move(values), variable_names_, step_duration_);
}

TimeSeriesInstance new_instance(const std::vector<std::vector<double>>& rows,
                                std::vector<std::string> variable_names) {
  return TimeSeriesInstance::create(Matrix::from_rows(rows),
                                    std::move(variable_names));
}

BackgroundSet::BackgroundSet(std::vector<TimeSeriesInstance> instances)
    : instances_(std::move(instances)) {
  if (instances_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "background set needs at least one instance");
  }
  const Shape expected = instances_.front().shape();
  for (std::size_t b = 0; b < instances_.size(); ++b) {
    if (instances_[b].shape() != expected) {
      throw Error(ErrorCode::kShapeMismatch,
                  "background instance " + std::to_string(b) + " has shape " +
                      to_string(instances_[b].shape()) + ", expected " +
                      to_string(expected));
    }
  }
}

Window::Window(std::size_t variable, std::vector<std::size_t> time_steps)
    : variable_(variable), time_steps_(std::move(time_steps)) {
  if (time_steps_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "window has no time steps");
  }
  std::sort(time_steps_.begin(), time_steps_.end());
  if (std::adjacent_find(time_steps_.begin(), time_steps_.end()) !=
      time_steps_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "window repeats a time step");
  }
}

Window Window::range(std::size_t variable, std::size_t start,
                     std::size_t end) {
  if (end <= start) {
    throw Error(ErrorCode::kInvalidArgument,
                "empty window range [" + std::to_string(start) + ", " +
                    std::to_string(end) + ")");
  }
  std::vector<std::size_t> steps(end - start);
  std::iota(steps.begin(), steps.end(), start);
  return Window(variable, std::move(steps));
}

bool Window::contains(std::size_t step) const {
  return std::binary_search(time_steps_.begin(), time_steps_.end(), step);
}

void validate_window_set(const WindowSet& ws, bool require_partition) {
  const Shape shape = ws.shape;
  // owned[i * L + t] marks cells already claimed by a window.
  std::vector<char> owned(shape.cells(), 0);
  for (const Window& w : ws.windows) {
    if (w.variable() >= shape.variables) {
      throw Error(ErrorCode::kShapeMismatch,
                  "window references variable " +
                      std::to_string(w.variable()) + " but D = " +
                      std::to_string(shape.variables));
    }
    for (std::size_t t : w.time_steps()) {
      if (t >= shape.steps) {
        throw Error(ErrorCode::kShapeMismatch,
                    "window references step " + std::to_string(t) +
                        " but L = " + std::to_string(shape.steps));
      }
      char& cell = owned[w.variable() * shape.steps + t];
      if (cell) throw OverlappingWindowsError(w.variable(), t);
      cell = 1;
    }
  }
  if (!require_partition) return;
  for (std::size_t i = 0; i < shape.variables; ++i) {
    std::vector<std::size_t> missing;
    for (std::size_t t = 0; t < shape.steps; ++t) {
      if (!owned[i * shape.steps + t]) missing.push_back(t);
    }
    if (!missing.empty()) throw IncompleteCoverageError(i, std::move(missing));
  }
}

double Attribution::efficiency_residual() const {
  double total = base_value;
  for (double v : point_values.flat()) total += v;
  return total - prediction;
}

Matrix distribute_window_values(Shape shape,
                                const std::vector<WindowValue>& values) {
  Matrix out(shape.variables, shape.steps, 0.0);
  for (const WindowValue& wv : values) {
    const double share = wv.value / static_cast<double>(wv.window.size());
    for (std::size_t t : wv.window.time_steps()) {
      out(wv.window.variable(), t) += share;
    }
  }
  return out;
}

InstanceBatch::InstanceBatch(Shape shape, std::size_t count)
    : shape_(shape), count_(count), data_(shape.cells() * count, 0.0) {}

void InstanceBatch::resize(std::size_t count) {
  count_ = count;
  data_.resize(shape_.cells() * count);
}

void InstanceBatch::set(std::size_t n, const TimeSeriesInstance& instance) {
  if (instance.shape() != shape_) {
    throw Error(ErrorCode::kShapeMismatch,
                "instance shape " + to_string(instance.shape()) +
                    " does not match batch shape " + to_string(shape_));
  }
  const auto src = instance.values().flat();
  std::copy(src.begin(), src.end(), this->instance(n).begin());
}

double Predictor::predict_one(const TimeSeriesInstance& instance) {
  InstanceBatch batch(instance.shape(), 1);
  batch.set(0, instance);
  const std::vector<double> scores = predict(batch);
  if (scores.size() != 1) {
    throw Error(ErrorCode::kPredictorFailure,
                "predictor returned " + std::to_string(scores.size()) +
                    " scores for 1 instance");
  }
  return scores.front();
}

}  // namespace windowshap
