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

#ifndef WINDOWSHAP_EVALUATION_HPP_
#define WINDOWSHAP_EVALUATION_HPP_

// Perturbation-based quality metrics for relevance maps.
//
// Cells whose relevance strictly exceeds the p-th nearest-rank percentile of
// the whole D x L relevance matrix are perturbed, and the model's binary
// cross-entropy on the perturbed instance is compared with the original:
// ratio = bce(f(perturbed), y) / bce(f(x), y). Larger ratios mean the
// relevance map found cells the model depends on.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "windowshap/algorithms.hpp"
#include "windowshap/domain.hpp"

namespace windowshap {

struct RelevanceMatrix {
  Matrix values;
  std::string source;
};

// |point_values|.
RelevanceMatrix relevance_from(const Attribution& attribution,
                               std::string source);

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value (the
// smallest for p = 0). Throws kInvalidArgument for p outside [0, 100] or
// empty input.
double nearest_rank_percentile(std::span<const double> values, double p);

// Qualifying cells (i, t) become max(row i) - x(i, t).
TimeSeriesInstance perturb_inverse(const TimeSeriesInstance& x,
                                   const RelevanceMatrix& r, double p);

// For each qualifying cell (i, t), x(i, t..t+n) (clamped to L) is set to the
// mean of row i of the original instance.
TimeSeriesInstance perturb_mean_interval(const TimeSeriesInstance& x,
                                         const RelevanceMatrix& r, double p,
                                         std::size_t n);

constexpr double kBceEpsilon = 1e-7;

// Binary cross-entropy with the prediction clamped to [eps, 1 - eps].
double bce(double prediction, int label);

enum class PerturbationMetric { kInverse, kMeanInterval };

const char* metric_name(PerturbationMetric metric);
PerturbationMetric parse_metric(const std::string& name);

struct EvalReport {
  PerturbationMetric metric = PerturbationMetric::kInverse;
  double p = 0.0;
  std::optional<std::size_t> n;
  std::vector<double> ratios;
  double mean = 0.0;
  double sem = 0.0;
  // Instances whose original loss was too small to divide by.
  std::vector<std::size_t> skipped;
  std::string source;

  nlohmann::json to_json() const;
};

// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
// SEM is 0 for fewer than two values.
void summarize(EvalReport& report);

// Which relevance map to score. algorithm is one of stationary, sliding,
// dynamic, zero (all-zero relevance) or random (uniform in [0, 1)).
struct ExplainerConfig {
  std::string algorithm;
  StationaryParams stationary;
  SlidingParams sliding;
  DynamicParams dynamic;
  std::uint64_t seed = 0;
};

// index identifies the instance; the random explainer seeds from it.
using Explainer = std::function<RelevanceMatrix(
    Predictor&, const TimeSeriesInstance&, const BackgroundSet&,
    std::size_t index)>;

Explainer make_explainer(const ExplainerConfig& config);

using PredictorFactory = std::function<std::unique_ptr<Predictor>()>;

// Explains every instance. With jobs > 1 instances are spread over worker
// threads, each owning a predictor from `factory`.
std::vector<RelevanceMatrix> explain_all(
    const PredictorFactory& factory, const std::vector<TimeSeriesInstance>& xs,
    const BackgroundSet& background, const Explainer& explainer,
    int jobs = 1);

EvalReport evaluate_relevance(Predictor& predictor,
                              const std::vector<TimeSeriesInstance>& xs,
                              const std::vector<int>& labels,
                              const std::vector<RelevanceMatrix>& relevance,
                              PerturbationMetric metric, double p,
                              std::size_t n);

EvalReport evaluate_explainer(const PredictorFactory& factory,
                              const std::vector<TimeSeriesInstance>& xs,
                              const std::vector<int>& labels,
                              const BackgroundSet& background,
                              const ExplainerConfig& config,
                              PerturbationMetric metric, double p,
                              std::size_t n, int jobs = 1);

}  // namespace windowshap

#endif  // WINDOWSHAP_EVALUATION_HPP_
