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

#include "windowshap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <utility>

#ifdef WINDOWSHAP_HAVE_OPENMP
#include <omp.h>
#endif

namespace windowshap {

namespace {

constexpr double kDivisionGuard = 1e-12;

void check_relevance_shape(const TimeSeriesInstance& x,
                           const RelevanceMatrix& r) {
  if (r.values.shape() != x.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "relevance shape " + to_string(r.values.shape()) +
                    " does not match instance shape " + to_string(x.shape()));
  }
}

}  // namespace

RelevanceMatrix relevance_from(const Attribution& attribution,
                               std::string source) {
  Matrix values = attribution.point_values;
  for (double& v : values.flat()) v = std::abs(v);
  return {std::move(values), std::move(source)};
}

double nearest_rank_percentile(std::span<const double> values, double p) {
  if (!(p >= 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "percentile " + std::to_string(p) + " outside [0, 100]");
  }
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "percentile of no values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  return sorted[rank == 0 ? 0 : rank - 1];
}

TimeSeriesInstance perturb_inverse(const TimeSeriesInstance& x,
                                   const RelevanceMatrix& r, double p) {
  check_relevance_shape(x, r);
  const double tau = nearest_rank_percentile(r.values.flat(), p);
  const Matrix& original = x.values();
  Matrix out = original;
  for (std::size_t i = 0; i < original.rows(); ++i) {
    const auto row = original.row(i);
    const double row_max = *std::max_element(row.begin(), row.end());
    for (std::size_t t = 0; t < original.cols(); ++t) {
      if (r.values(i, t) > tau) out(i, t) = row_max - original(i, t);
    }
  }
  return x.with_values(std::move(out));
}

TimeSeriesInstance perturb_mean_interval(const TimeSeriesInstance& x,
                                         const RelevanceMatrix& r, double p,
                                         std::size_t n) {
  check_relevance_shape(x, r);
  const double tau = nearest_rank_percentile(r.values.flat(), p);
  const Matrix& original = x.values();
  const std::size_t steps = original.cols();
  Matrix out = original;
  for (std::size_t i = 0; i < original.rows(); ++i) {
    const auto row = original.row(i);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) /
                        static_cast<double>(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      if (!(r.values(i, t) > tau)) continue;
      const std::size_t end = std::min(steps, t + n + 1);
      for (std::size_t u = t; u < end; ++u) out(i, u) = mean;
    }
  }
  return x.with_values(std::move(out));
}

double bce(double prediction, int label) {
  const double q = std::clamp(prediction, kBceEpsilon, 1.0 - kBceEpsilon);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

const char* metric_name(PerturbationMetric metric) {
  return metric == PerturbationMetric::kInverse ? "inverse" : "mean_interval";
}

PerturbationMetric parse_metric(const std::string& name) {
  if (name == "inverse") return PerturbationMetric::kInverse;
  if (name == "mean_interval" || name == "mean-interval") {
    return PerturbationMetric::kMeanInterval;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["metric"] = metric_name(metric);
  j["p"] = p;
  j["n"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
  j["ratios"] = ratios;
  j["mean"] = mean;
  j["sem"] = sem;
  j["skipped"] = skipped;
  if (!source.empty()) j["source"] = source;
  return j;
}

void summarize(EvalReport& report) {
  const std::size_t count = report.ratios.size();
  if (count == 0) {
    report.mean = 0.0;
    report.sem = 0.0;
    return;
  }
  const double mean =
      std::accumulate(report.ratios.begin(), report.ratios.end(), 0.0) /
      static_cast<double>(count);
  double ss = 0.0;
  for (double r : report.ratios) ss += (r - mean) * (r - mean);
  report.mean = mean;
  report.sem = count < 2 ? 0.0
                         : std::sqrt(ss / static_cast<double>(count - 1)) /
                               std::sqrt(static_cast<double>(count));
}

Explainer make_explainer(const ExplainerConfig& config) {
  const std::string& name = config.algorithm;
  if (name == "stationary") {
    return [params = config.stationary](Predictor& f,
                                        const TimeSeriesInstance& x,
                                        const BackgroundSet& bg, std::size_t) {
      return relevance_from(stationary_windowshap(f, x, bg, params),
                            "stationary");
    };
  }
  if (name == "sliding") {
    return [params = config.sliding](Predictor& f, const TimeSeriesInstance& x,
                                     const BackgroundSet& bg, std::size_t) {
      return relevance_from(sliding_windowshap(f, x, bg, params), "sliding");
    };
  }
  if (name == "dynamic") {
    return [params = config.dynamic](Predictor& f, const TimeSeriesInstance& x,
                                     const BackgroundSet& bg, std::size_t) {
      return relevance_from(dynamic_windowshap(f, x, bg, params), "dynamic");
    };
  }
  if (name == "zero") {
    return [](Predictor&, const TimeSeriesInstance& x, const BackgroundSet&,
              std::size_t) {
      return RelevanceMatrix{Matrix(x.shape().variables, x.shape().steps, 0.0),
                             "zero"};
    };
  }
  if (name == "random") {
    return [seed = config.seed](Predictor&, const TimeSeriesInstance& x,
                                const BackgroundSet&, std::size_t index) {
      std::mt19937_64 rng(derive_seed(seed, index));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Matrix values(x.shape().variables, x.shape().steps);
      for (double& v : values.flat()) v = unit(rng);
      return RelevanceMatrix{std::move(values), "random"};
    };
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown explainer algorithm '" + name + "'");
}

std::vector<RelevanceMatrix> explain_all(
    const PredictorFactory& factory, const std::vector<TimeSeriesInstance>& xs,
    const BackgroundSet& background, const Explainer& explainer, int jobs) {
  std::vector<RelevanceMatrix> out(xs.size());
  if (jobs <= 1 || xs.size() < 2) {
    auto predictor = factory();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      out[k] = explainer(*predictor, xs[k], background, k);
    }
    return out;
  }
  std::vector<std::exception_ptr> errors(xs.size());
#pragma omp parallel num_threads(jobs)
  {
    std::unique_ptr<Predictor> predictor;
    std::exception_ptr init_error;
    try {
      predictor = factory();
    } catch (...) {
      init_error = std::current_exception();
    }
#pragma omp for schedule(dynamic, 1)
    for (long long k = 0; k < static_cast<long long>(xs.size()); ++k) {
      if (init_error) {
        errors[k] = init_error;
        continue;
      }
      try {
        out[k] = explainer(*predictor, xs[k], background,
                           static_cast<std::size_t>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalReport evaluate_relevance(Predictor& predictor,
                              const std::vector<TimeSeriesInstance>& xs,
                              const std::vector<int>& labels,
                              const std::vector<RelevanceMatrix>& relevance,
                              PerturbationMetric metric, double p,
                              std::size_t n) {
  if (xs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no instances to evaluate");
  }
  if (labels.size() != xs.size() || relevance.size() != xs.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(xs.size()) + " instances, " +
                    std::to_string(labels.size()) + " labels, " +
                    std::to_string(relevance.size()) + " relevance maps");
  }
  if (!(p >= 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "percentile " + std::to_string(p) + " outside [0, 100]");
  }
  EvalReport report;
  report.metric = metric;
  report.p = p;
  if (metric == PerturbationMetric::kMeanInterval) report.n = n;
  if (!relevance.empty()) report.source = relevance.front().source;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(labels[k]) + " is not 0 or 1");
    }
    const double original = bce(predictor.predict_one(xs[k]), labels[k]);
    if (original < kDivisionGuard) {
      report.skipped.push_back(k);
      continue;
    }
    const TimeSeriesInstance perturbed =
        metric == PerturbationMetric::kInverse
            ? perturb_inverse(xs[k], relevance[k], p)
            : perturb_mean_interval(xs[k], relevance[k], p, n);
    const double after = bce(predictor.predict_one(perturbed), labels[k]);
    report.ratios.push_back(after / original);
  }
  summarize(report);
  return report;
}

EvalReport evaluate_explainer(const PredictorFactory& factory,
                              const std::vector<TimeSeriesInstance>& xs,
                              const std::vector<int>& labels,
                              const BackgroundSet& background,
                              const ExplainerConfig& config,
                              PerturbationMetric metric, double p,
                              std::size_t n, int jobs) {
  const auto relevance =
      explain_all(factory, xs, background, make_explainer(config), jobs);
  auto predictor = factory();
  return evaluate_relevance(*predictor, xs, labels, relevance, metric, p, n);
}

}  // namespace windowshap
