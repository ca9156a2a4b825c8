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


#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "windowshap/evaluation.hpp"
#include "windowshap/models.hpp"

namespace windowshap {
namespace {

RelevanceMatrix rel(std::vector<std::vector<double>> rows) {
  return RelevanceMatrix{Matrix::from_rows(rows), "test"};
}

TEST(Percentile, NearestRank) {
  const std::vector<double> v = {5, 1, 4, 2, 3};
  EXPECT_EQ(nearest_rank_percentile(v, 0), 1.0);
  EXPECT_EQ(nearest_rank_percentile(v, 20), 1.0);
  EXPECT_EQ(nearest_rank_percentile(v, 21), 2.0);
  EXPECT_EQ(nearest_rank_percentile(v, 50), 3.0);
  EXPECT_EQ(nearest_rank_percentile(v, 100), 5.0);
  EXPECT_THROW(nearest_rank_percentile(v, 101), Error);
  EXPECT_THROW(nearest_rank_percentile(v, -1), Error);
  EXPECT_THROW(nearest_rank_percentile(std::span<const double>(), 50), Error);
}

TEST(PerturbInverse, HandExample) {
  const auto x = new_instance({{1, 2, 3, 4}}, {"a"});
  // tau = 0 at p = 75, only index 2 exceeds it.
  const auto out = perturb_inverse(x, rel({{0, 0, 1, 0}}), 75);
  EXPECT_EQ(out.values().to_rows()[0], (std::vector<double>{1, 2, 1, 4}));
}

TEST(PerturbInverse, NoQualifyingCells) {
  const auto x = new_instance({{1, 2, 3, 4}}, {"a"});
  EXPECT_EQ(perturb_inverse(x, rel({{0, 0, 0, 0}}), 90), x);
  // tau >= max(r) leaves x alone.
  EXPECT_EQ(perturb_inverse(x, rel({{1, 2, 3, 4}}), 100), x);
}

TEST(PerturbInverse, ConstantRowAndInvolution) {
  const auto x = new_instance({{5, 5, 5, 5}}, {"a"});
  const auto out = perturb_inverse(x, rel({{1, 1, 0, 0}}), 50);
  EXPECT_EQ(out.values().to_rows()[0], (std::vector<double>{0, 0, 5, 5}));

  std::mt19937_64 rng(1);
  const auto y = testing::random_instance({3, 9}, rng);
  const auto r = RelevanceMatrix{testing::random_instance({3, 9}, rng).values(), "r"};
  const auto once = perturb_inverse(y, r, 60);
  const double tau = nearest_rank_percentile(r.values.flat(), 60);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto row = y.values().row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    for (std::size_t t = 0; t < 9; ++t) {
      if (r.values(i, t) > tau) {
        EXPECT_NEAR(mx - once.values()(i, t), y.values()(i, t), 1e-12);
      } else {
        EXPECT_EQ(once.values()(i, t), y.values()(i, t));
      }
    }
  }
}

TEST(PerturbMeanInterval, Examples) {
  const auto x = new_instance({{0, 0, 10, 0}}, {"a"});
  const auto one = perturb_mean_interval(x, rel({{0, 0, 1, 0}}), 75, 0);
  EXPECT_EQ(one.values().to_rows()[0], (std::vector<double>{0, 0, 2.5, 0}));
  EXPECT_EQ(perturb_mean_interval(x, rel({{0, 0, 0, 0}}), 50, 3), x);
  const auto tail = perturb_mean_interval(x, rel({{0, 0, 0, 1}}), 75, 3);
  EXPECT_EQ(tail.values().to_rows()[0], (std::vector<double>{0, 0, 10, 2.5}));
  const auto wide = perturb_mean_interval(x, rel({{0, 1, 0, 0}}), 75, 1);
  EXPECT_EQ(wide.values().to_rows()[0], (std::vector<double>{0, 2.5, 2.5, 0}));
}

TEST(Perturb, ShapeMismatch) {
  const auto x = new_instance({{1, 2, 3}}, {"a"});
  try {
    perturb_inverse(x, rel({{1, 2}}), 50);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  EXPECT_THROW(perturb_mean_interval(x, rel({{1, 2, 3}, {1, 2, 3}}), 50, 1), Error);
}

TEST(Bce, ClosedForms) {
  EXPECT_NEAR(bce(0.5, 1), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce(0.9, 0), -std::log(0.1), 1e-12);
  EXPECT_NEAR(bce(1.0, 1), kBceEpsilon, 1e-12);
  EXPECT_TRUE(std::isfinite(bce(0.0, 1)));
  EXPECT_NEAR(bce(0.0, 1), -std::log(kBceEpsilon), 1e-9);
}

TEST(Summarize, MeanAndSem) {
  EvalReport r;
  r.ratios = {1, 2, 3, 4};
  summarize(r);
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  EXPECT_NEAR(r.sem, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  r.ratios = {7};
  summarize(r);
  EXPECT_EQ(r.sem, 0.0);
}

TEST(EvaluateRelevance, SingleInstanceByHand) {
  // f = sigmoid(x0 + x1 + x2 + x3); inverse perturbation of index 2.
  auto model = builtin_linear(Matrix::from_rows({{1, 1, 1, 1}}), 0.0);
  const auto x = new_instance({{1, 2, 3, 4}}, {"a"});
  const auto report = evaluate_relevance(*model, {x}, {1}, {rel({{0, 0, 1, 0}})},
                                         PerturbationMetric::kInverse, 75, 0);
  const double before = -std::log(testing::logistic(10.0));
  const double after = -std::log(testing::logistic(8.0));
  ASSERT_EQ(report.ratios.size(), 1u);
  EXPECT_NEAR(report.ratios[0], after / before, 1e-9);
}

TEST(EvaluateRelevance, ZeroRelevanceGivesOne) {
  std::mt19937_64 rng(2);
  const Shape shape{2, 10};
  auto model = builtin_recency(shape, 0.1, 1.0, 0.0);
  std::vector<TimeSeriesInstance> xs;
  std::vector<int> labels;
  std::vector<RelevanceMatrix> r;
  for (int k = 0; k < 6; ++k) {
    xs.push_back(testing::random_instance(shape, rng));
    labels.push_back(k % 2);
    r.push_back({Matrix(2, 10, 0.0), "zero"});
  }
  for (auto metric : {PerturbationMetric::kInverse, PerturbationMetric::kMeanInterval}) {
    const auto report = evaluate_relevance(*model, xs, labels, r, metric, 90, 5);
    for (double v : report.ratios) EXPECT_EQ(v, 1.0);
    EXPECT_EQ(report.mean, 1.0);
    EXPECT_EQ(report.sem, 0.0);
  }
}

TEST(EvaluateRelevance, ConfidentPredictionStillDivides) {
  // Clamping keeps every loss near 1e-7 or above, so saturated predictions
  // are scored rather than skipped.
  auto model = builtin_linear(Matrix::from_rows({{100, 0}}), 0.0);
  const auto x = new_instance({{1, 0}}, {"a"});
  const auto report = evaluate_relevance(*model, {x}, {1}, {rel({{1, 0}})},
                                         PerturbationMetric::kInverse, 50, 0);
  EXPECT_TRUE(report.skipped.empty());
  ASSERT_EQ(report.ratios.size(), 1u);
  EXPECT_GT(report.ratios[0], 1.0);
}

TEST(EvaluateRelevance, Validation) {
  auto model = builtin_linear(Matrix::from_rows({{1, 1}}), 0.0);
  const auto x = new_instance({{1, 2}}, {"a"});
  EXPECT_THROW(evaluate_relevance(*model, {}, {}, {}, PerturbationMetric::kInverse, 50, 0),
               Error);
  EXPECT_THROW(evaluate_relevance(*model, {x}, {1, 0}, {rel({{0, 0}})},
                                  PerturbationMetric::kInverse, 50, 0),
               Error);
  EXPECT_THROW(evaluate_relevance(*model, {x}, {1}, {rel({{0, 0}})},
                                  PerturbationMetric::kInverse, 101, 0),
               Error);
}

TEST(EvaluateExplainer, SelfConsistentReportAndJobs) {
  const SyntheticData data = generate_synthetic(SyntheticKind::kAnomaly, 2, 30, 8, 3);
  const SyntheticData pool = generate_synthetic(SyntheticKind::kAnomaly, 2, 30, 10, 4);
  std::vector<TimeSeriesInstance> bg;
  for (std::size_t k = 0; k < pool.instances.size(); ++k)
    if (pool.labels[k] == 0) bg.push_back(pool.instances[k]);
  const BackgroundSet background(bg);
  const Shape shape{2, 30};
  PredictorFactory factory = [&] {
    return builtin_anomaly(shape, synthetic_segment_length(30), 0.5, 10.0);
  };
  ExplainerConfig config;
  config.algorithm = "stationary";
  config.stationary.window_len = 4;
  config.stationary.engine.exact_threshold = 16;
  const auto serial = evaluate_explainer(factory, data.instances, data.labels,
                                         background, config,
                                         PerturbationMetric::kInverse, 90, 5, 1);
  const auto threaded = evaluate_explainer(factory, data.instances, data.labels,
                                           background, config,
                                           PerturbationMetric::kInverse, 90, 5, 3);
  EXPECT_EQ(serial.ratios, threaded.ratios);
  EvalReport copy = serial;
  summarize(copy);
  EXPECT_EQ(copy.mean, serial.mean);
  EXPECT_EQ(copy.sem, serial.sem);
  const auto j = serial.to_json();
  EXPECT_EQ(j["metric"], "inverse");
  EXPECT_EQ(j["ratios"].size(), 8u);
  EXPECT_TRUE(j["n"].is_null());
  for (double r : serial.ratios) EXPECT_GE(r, 0.0);
}

TEST(MakeExplainer, RandomIsSeededPerInstance) {
  ExplainerConfig c;
  c.algorithm = "random";
  c.seed = 9;
  const Explainer e = make_explainer(c);
  auto model = builtin_linear(Matrix(1, 5, 0.0), 0.0);
  const auto x = new_instance({{1, 2, 3, 4, 5}}, {"a"});
  const BackgroundSet bg({x});
  const auto a = e(*model, x, bg, 0);
  const auto b = e(*model, x, bg, 0);
  const auto other = e(*model, x, bg, 1);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, other.values);
  for (double v : a.values.flat()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  c.algorithm = "nope";
  EXPECT_THROW(make_explainer(c), Error);
}

TEST(Metric, Parse) {
  EXPECT_EQ(parse_metric("inverse"), PerturbationMetric::kInverse);
  EXPECT_EQ(parse_metric("mean_interval"), PerturbationMetric::kMeanInterval);
  EXPECT_THROW(parse_metric("other"), Error);
}

}  // namespace
}  // namespace windowshap
