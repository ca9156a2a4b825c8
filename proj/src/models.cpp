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

#include "windowshap/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "windowshap/kernels.hpp"

namespace windowshap {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

void check_batch_shape(Shape expected, const InstanceBatch& batch) {
  if (batch.shape() != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                "batch shape " + to_string(batch.shape()) +
                    " does not match model shape " + to_string(expected));
  }
}

nlohmann::json read_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open model parameters '" + path + "'");
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                "model parameters '" + path + "': " + e.what());
  }
}

template <typename T>
T param_or(const nlohmann::json& params, const char* key, T fallback) {
  if (!params.contains(key) || params.at(key).is_null()) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                std::string("model parameter '") + key + "': " + e.what());
  }
}

}  // namespace

LinearPredictor::LinearPredictor(Matrix weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.rows() == 0 || weights_.cols() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "linear model has no weights");
  }
  for (double w : weights_.flat()) {
    if (!std::isfinite(w)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite linear weight");
    }
  }
  if (!std::isfinite(bias_)) {
    throw Error(ErrorCode::kNonFiniteValue, "non-finite linear bias");
  }
}

std::vector<double> LinearPredictor::predict(const InstanceBatch& batch) {
  check_batch_shape(weights_.shape(), batch);
  std::vector<double> scores =
      kernels::parallel::linear_scores(batch.flat(), weights_.flat(), bias_);
  for (double& s : scores) s = sigmoid(s);
  return scores;
}

AnomalyPredictor::AnomalyPredictor(Shape shape, std::size_t window_len,
                                   double threshold, double gain)
    : shape_(shape),
      window_len_(window_len),
      threshold_(threshold),
      gain_(gain) {
  if (window_len < 1 || window_len > shape.steps) {
    throw Error(ErrorCode::kInvalidWindowLength,
                "anomaly window length " + std::to_string(window_len) +
                    " must lie in [1, " + std::to_string(shape.steps) + "]");
  }
}

std::vector<double> AnomalyPredictor::predict(const InstanceBatch& batch) {
  check_batch_shape(shape_, batch);
  const long long count = static_cast<long long>(batch.size());
  const std::size_t steps = shape_.steps;
  std::vector<double> scores(batch.size());
#pragma omp parallel for schedule(static) if (count * steps >= 16384)
  for (long long n = 0; n < count; ++n) {
    // Variable 0 is the first row of the instance.
    const double* row = batch.instance(static_cast<std::size_t>(n)).data();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + window_len_ <= steps; ++t) {
      double sum = 0.0;
      for (std::size_t u = t; u < t + window_len_; ++u) sum += row[u];
      best = std::max(best, sum / static_cast<double>(window_len_));
    }
    scores[n] = sigmoid(gain_ * (best - threshold_));
  }
  return scores;
}

std::unique_ptr<Predictor> builtin_linear(Matrix weights, double bias) {
  return std::make_unique<LinearPredictor>(std::move(weights), bias);
}

std::unique_ptr<Predictor> builtin_recency(Shape shape, double rate,
                                           double gain, double bias) {
  if (shape.cells() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "recency model needs D, L >= 1");
  }
  Matrix w(shape.variables, shape.steps);
  for (std::size_t i = 0; i < shape.variables; ++i) {
    for (std::size_t t = 0; t < shape.steps; ++t) {
      w(i, t) = gain *
                std::exp(-rate * static_cast<double>(shape.steps - 1 - t)) /
                static_cast<double>(shape.variables);
    }
  }
  return builtin_linear(std::move(w), bias);
}

std::unique_ptr<Predictor> builtin_anomaly(Shape shape,
                                           std::size_t window_len,
                                           double threshold, double gain) {
  return std::make_unique<AnomalyPredictor>(shape, window_len, threshold,
                                            gain);
}

ModelSpec ModelSpec::parse(const std::string& address) {
  ModelSpec spec;
  auto starts_with = [&](const char* prefix) {
    return address.rfind(prefix, 0) == 0;
  };
  if (starts_with("builtin:")) {
    const std::string rest = address.substr(8);
    const auto at = rest.find('@');
    const std::string kind = rest.substr(0, at);
    if (kind == "linear") {
      spec.kind = ModelKind::kLinear;
    } else if (kind == "recency") {
      spec.kind = ModelKind::kRecency;
    } else if (kind == "anomaly") {
      spec.kind = ModelKind::kAnomaly;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown builtin model '" + kind + "'");
    }
    if (at != std::string::npos) {
      spec.params = read_params_file(rest.substr(at + 1));
      if (!spec.params.is_object()) {
        throw Error(ErrorCode::kParse, "model parameters must be an object");
      }
    }
    return spec;
  }
  if (starts_with("cmd:")) {
    spec.kind = ModelKind::kExternalCmd;
    spec.target = address.substr(4);
  } else if (starts_with("http:")) {
    spec.kind = ModelKind::kExternalHttp;
    spec.target = address.substr(5);
    // Accept both http:<host:port/path> and http:http://host...
    if (spec.target.rfind("http://", 0) != 0) {
      spec.target = "http://" +
                    spec.target.substr(spec.target.find_first_not_of('/'));
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "model address '" + address +
                    "' must start with builtin:, cmd: or http:");
  }
  if (spec.target.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "model address '" + address + "' has no target");
  }
  return spec;
}

std::chrono::milliseconds default_external_timeout() {
  if (const char* env = std::getenv("WINDOWSHAP_TIMEOUT_SECS")) {
    char* end = nullptr;
    const double secs = std::strtod(env, &end);
    if (end != env && secs > 0.0) {
      return std::chrono::milliseconds(static_cast<long long>(secs * 1000.0));
    }
  }
  return std::chrono::seconds(30);
}

std::unique_ptr<Predictor> make_predictor(const ModelSpec& spec, Shape shape,
                                          std::chrono::milliseconds timeout) {
  switch (spec.kind) {
    case ModelKind::kLinear: {
      if (!spec.params.contains("weights")) {
        throw Error(ErrorCode::kInvalidArgument,
                    "builtin:linear needs a parameters file with 'weights'");
      }
      Matrix w;
      try {
        w = Matrix::from_rows(
            spec.params.at("weights").get<std::vector<std::vector<double>>>());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse,
                    std::string("linear weights: ") + e.what());
      }
      if (w.shape() != shape) {
        throw Error(ErrorCode::kShapeMismatch,
                    "linear weights have shape " + to_string(w.shape()) +
                        ", data has " + to_string(shape));
      }
      return builtin_linear(std::move(w), param_or(spec.params, "bias", 0.0));
    }
    case ModelKind::kRecency:
      return builtin_recency(shape, param_or(spec.params, "rate", 0.1),
                             param_or(spec.params, "gain", 1.0),
                             param_or(spec.params, "bias", 0.0));
    case ModelKind::kAnomaly:
      return builtin_anomaly(
          shape,
          param_or(spec.params, "window_len",
                   synthetic_segment_length(shape.steps)),
          param_or(spec.params, "threshold", 0.5),
          param_or(spec.params, "gain", 10.0));
    case ModelKind::kExternalCmd:
    case ModelKind::kExternalHttp:
      return external_predictor(spec, shape, timeout);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model kind");
}

namespace wire {

nlohmann::json encode_request(std::int64_t id, const InstanceBatch& batch) {
  const Shape shape = batch.shape();
  nlohmann::json instances = nlohmann::json::array();
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto flat = batch.instance(n);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < shape.variables; ++i) {
      rows.push_back(std::vector<double>(
          flat.begin() + static_cast<long>(i * shape.steps),
          flat.begin() + static_cast<long>((i + 1) * shape.steps)));
    }
    instances.push_back(std::move(rows));
  }
  return {{"id", id},
          {"shape", {shape.variables, shape.steps}},
          {"instances", std::move(instances)}};
}

InstanceBatch decode_request(const nlohmann::json& request,
                             std::int64_t* id) {
  try {
    const auto shape_arr = request.at("shape");
    const Shape shape{shape_arr.at(0).get<std::size_t>(),
                      shape_arr.at(1).get<std::size_t>()};
    const auto& instances = request.at("instances");
    InstanceBatch batch(shape, instances.size());
    for (std::size_t n = 0; n < instances.size(); ++n) {
      const auto& rows = instances.at(n);
      if (rows.size() != shape.variables) {
        throw Error(ErrorCode::kProtocolViolation,
                    "instance " + std::to_string(n) + " has " +
                        std::to_string(rows.size()) + " variables, shape says " +
                        std::to_string(shape.variables));
      }
      auto dst = batch.instance(n);
      for (std::size_t i = 0; i < shape.variables; ++i) {
        const auto& row = rows.at(i);
        if (row.size() != shape.steps) {
          throw Error(ErrorCode::kProtocolViolation,
                      "instance " + std::to_string(n) + " variable " +
                          std::to_string(i) + " has " +
                          std::to_string(row.size()) + " steps");
        }
        for (std::size_t t = 0; t < shape.steps; ++t) {
          dst[i * shape.steps + t] = row.at(t).get<double>();
        }
      }
    }
    if (id != nullptr) *id = request.at("id").get<std::int64_t>();
    return batch;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocolViolation,
                std::string("malformed request: ") + e.what());
  }
}

nlohmann::json encode_response(std::int64_t id,
                               const std::vector<double>& predictions) {
  return {{"id", id}, {"predictions", predictions}};
}

std::vector<double> decode_response(const nlohmann::json& response,
                                    std::int64_t expected_id,
                                    std::size_t expected_count) {
  if (!response.is_object()) {
    throw Error(ErrorCode::kProtocolViolation, "response is not an object");
  }
  if (response.contains("error")) {
    throw Error(ErrorCode::kPredictorFailure,
                "model server reported: " + response.at("error").dump());
  }
  std::vector<double> predictions;
  try {
    if (response.at("id").get<std::int64_t>() != expected_id) {
      throw Error(ErrorCode::kProtocolViolation,
                  "response id " + response.at("id").dump() +
                      " does not echo request id " +
                      std::to_string(expected_id));
    }
    predictions = response.at("predictions").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocolViolation,
                std::string("malformed response: ") + e.what());
  }
  if (predictions.size() != expected_count) {
    throw Error(ErrorCode::kProtocolViolation,
                "response has " + std::to_string(predictions.size()) +
                    " predictions for " + std::to_string(expected_count) +
                    " instances");
  }
  for (double p : predictions) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::kProtocolViolation,
                  "prediction " + std::to_string(p) + " outside [0, 1]");
    }
  }
  return predictions;
}

}  // namespace wire

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "anomaly") return SyntheticKind::kAnomaly;
  if (name == "smooth") return SyntheticKind::kSmooth;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown synthetic kind '" + name + "'");
}

const char* synthetic_kind_name(SyntheticKind kind) {
  return kind == SyntheticKind::kAnomaly ? "anomaly" : "smooth";
}

std::size_t synthetic_segment_length(std::size_t steps) {
  return steps / 10 + 1;
}

SyntheticData generate_synthetic(SyntheticKind kind, std::size_t variables,
                                 std::size_t steps, std::size_t n_instances,
                                 std::uint64_t seed) {
  if (variables == 0 || steps == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic data needs D >= 1 and L >= 1");
  }
  constexpr double kNoiseSigma = 0.1;
  constexpr double kBumpAmplitude = 1.0;
  constexpr double kWaveAmplitude = 0.3;
  constexpr double kTwoPi = 6.283185307179586;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kNoiseSigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticData data;
  data.labels.assign(n_instances, 0);
  std::fill(data.labels.begin(), data.labels.begin() + n_instances / 2, 1);
  std::shuffle(data.labels.begin(), data.labels.end(), rng);

  std::vector<std::string> names(variables);
  for (std::size_t i = 0; i < variables; ++i) {
    names[i] = "var" + std::to_string(i);
  }
  const std::size_t seg_len = synthetic_segment_length(steps);
  std::uniform_int_distribution<std::size_t> start_dist(0, steps - seg_len);

  for (std::size_t k = 0; k < n_instances; ++k) {
    Matrix x(variables, steps);
    for (std::size_t i = 0; i < variables; ++i) {
      const double phase = kind == SyntheticKind::kSmooth ? unit(rng) : 0.0;
      for (std::size_t t = 0; t < steps; ++t) {
        double v = noise(rng);
        if (kind == SyntheticKind::kSmooth) {
          v += kWaveAmplitude *
               std::sin(kTwoPi * (static_cast<double>(t) /
                                      static_cast<double>(steps) +
                                  phase));
        }
        x(i, t) = v;
      }
    }
    std::optional<Segment> segment;
    if (data.labels[k] == 1) {
      const std::size_t start = start_dist(rng);
      segment = Segment{start, start + seg_len};
      for (std::size_t t = segment->start; t < segment->end; ++t) {
        x(0, t) += kBumpAmplitude;
      }
    }
    data.instances.push_back(TimeSeriesInstance::create(std::move(x), names));
    data.segments.push_back(segment);
  }
  return data;
}

}  // namespace windowshap
