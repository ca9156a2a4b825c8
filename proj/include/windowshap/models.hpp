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

#ifndef WINDOWSHAP_MODELS_HPP_
#define WINDOWSHAP_MODELS_HPP_

// Built-in synthetic predictors with known importance structure, the
// synthetic anomaly data generator, and clients for external predictors
// speaking the JSON wire protocol over subprocess stdio or HTTP.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "windowshap/domain.hpp"

namespace windowshap {

double sigmoid(double z);

// f(X) = sigmoid(bias + sum_{i,t} W(i,t) X(i,t)).
class LinearPredictor : public Predictor {
 public:
  LinearPredictor(Matrix weights, double bias);

  Shape expected_shape() const override { return weights_.shape(); }
  std::vector<double> predict(const InstanceBatch& batch) override;

  const Matrix& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Matrix weights_;
  double bias_;
};

// f(X) = sigmoid(gain * (max over length-w sliding means of variable 0
// - threshold)). Variables other than 0 never affect the output.
class AnomalyPredictor : public Predictor {
 public:
  AnomalyPredictor(Shape shape, std::size_t window_len, double threshold,
                   double gain);

  Shape expected_shape() const override { return shape_; }
  std::vector<double> predict(const InstanceBatch& batch) override;

 private:
  Shape shape_;
  std::size_t window_len_;
  double threshold_;
  double gain_;
};

std::unique_ptr<Predictor> builtin_linear(Matrix weights, double bias);

// Linear model whose weight decays with distance from the last step:
// W(i,t) = gain * exp(-rate * (L - 1 - t)) / D.
std::unique_ptr<Predictor> builtin_recency(Shape shape, double rate,
                                           double gain, double bias);

std::unique_ptr<Predictor> builtin_anomaly(Shape shape,
                                           std::size_t window_len,
                                           double threshold, double gain);

enum class ModelKind {
  kLinear,
  kRecency,
  kAnomaly,
  kExternalCmd,
  kExternalHttp,
};

// Parsed model address: builtin:<kind>[@<params.json>], cmd:<command line>,
// or http:<url>.
struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  nlohmann::json params = nlohmann::json::object();
  // Command line or URL for external models.
  std::string target;

  static ModelSpec parse(const std::string& address);
};

// WINDOWSHAP_TIMEOUT_SECS when set, else 30 s.
std::chrono::milliseconds default_external_timeout();

// Builds a predictor for instances of `shape`. Builtin parameter files may
// omit entries; see README for defaults.
std::unique_ptr<Predictor> make_predictor(
    const ModelSpec& spec, Shape shape,
    std::chrono::milliseconds timeout = default_external_timeout());

// Subprocess or HTTP predictor. Performs a health check (an empty batch) on
// construction. Throws kConnectionFailure, kProtocolViolation, kTimeout.
std::unique_ptr<Predictor> external_predictor(
    const ModelSpec& spec, Shape shape,
    std::chrono::milliseconds timeout = default_external_timeout());

namespace wire {

nlohmann::json encode_request(std::int64_t id, const InstanceBatch& batch);

// Inverse of encode_request; throws kProtocolViolation on malformed input.
InstanceBatch decode_request(const nlohmann::json& request,
                             std::int64_t* id);

nlohmann::json encode_response(std::int64_t id,
                               const std::vector<double>& predictions);

// Validates id echo, prediction count, and the [0, 1] range.
std::vector<double> decode_response(const nlohmann::json& response,
                                    std::int64_t expected_id,
                                    std::size_t expected_count);

}  // namespace wire

enum class SyntheticKind { kAnomaly, kSmooth };

SyntheticKind parse_synthetic_kind(const std::string& name);
const char* synthetic_kind_name(SyntheticKind kind);

struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

struct SyntheticData {
  std::vector<TimeSeriesInstance> instances;
  std::vector<int> labels;
  // Location of the injected bump in variable 0 for label-1 instances.
  std::vector<std::optional<Segment>> segments;
};

// Gaussian noise (sigma 0.1) around 0; kind smooth adds a one-period
// sinusoid of amplitude 0.3 with random phase to every variable. floor(n/2)
// instances, chosen at random, get label 1 and an additive bump of 1.0 over
// floor(L/10) + 1 consecutive steps of variable 0.
SyntheticData generate_synthetic(SyntheticKind kind, std::size_t variables,
                                 std::size_t steps, std::size_t n_instances,
                                 std::uint64_t seed);

std::size_t synthetic_segment_length(std::size_t steps);

}  // namespace windowshap

#endif  // WINDOWSHAP_MODELS_HPP_
