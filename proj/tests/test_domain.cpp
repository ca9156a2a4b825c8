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


#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "windowshap/domain.hpp"
#include "windowshap/windowing.hpp"

namespace windowshap {
namespace {

TEST(NewInstance, WellFormed) {
  auto x = new_instance({{1, 2, 3}, {4, 5, 6}}, {"hr", "sbp"});
  EXPECT_EQ(x.shape().variables, 2u);
  EXPECT_EQ(x.shape().steps, 3u);
  EXPECT_EQ(x.values()(1, 2), 6.0);
  EXPECT_EQ(x.variable_names()[0], "hr");
}

TEST(NewInstance, WrongNameCount) {
  try {
    new_instance({{1, 2, 3}, {4, 5, 6}}, {"hr"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kShapeMismatch ||
                e.code() == ErrorCode::kDuplicateVariableName);
  }
}

TEST(NewInstance, DuplicateNames) {
  try {
    new_instance({{1}, {2}}, {"a", "a"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateVariableName);
  }
}

TEST(NewInstance, NonFinite) {
  for (double bad : {std::nan(""), std::numeric_limits<double>::infinity()}) {
    try {
      new_instance({{1, bad, 3}}, {"a"});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
    }
  }
}

TEST(NewInstance, RaggedAndEmpty) {
  EXPECT_THROW(new_instance({{1, 2}, {3}}, {"a", "b"}), Error);
  EXPECT_THROW(new_instance({}, {}), Error);
  EXPECT_THROW(new_instance({{}}, {"a"}), Error);
}

TEST(BackgroundSet, RejectsEmptyAndMixedShapes) {
  EXPECT_THROW(BackgroundSet({}), Error);
  try {
    BackgroundSet({new_instance({{1, 2}}, {"a"}), new_instance({{1}}, {"a"})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Window, SortsAndRejectsDuplicates) {
  Window w(0, {4, 2, 3});
  EXPECT_EQ(w.time_steps(), (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_TRUE(w.contiguous());
  EXPECT_FALSE(Window(0, {1, 3}).contiguous());
  EXPECT_THROW(Window(0, {1, 1}), Error);
  EXPECT_THROW(Window(0, {}), Error);
}

WindowSet one_var(std::vector<Window> ws, std::size_t steps) {
  return WindowSet{std::move(ws), Shape{1, steps}, true};
}

TEST(ValidateWindowSet, ExactCover) {
  EXPECT_NO_THROW(validate_window_set(
      one_var({Window::range(0, 0, 3), Window::range(0, 3, 6)}, 6), true));
}

TEST(ValidateWindowSet, Overlap) {
  try {
    validate_window_set(
        one_var({Window::range(0, 0, 4), Window::range(0, 3, 6)}, 6), true);
    FAIL();
  } catch (const OverlappingWindowsError& e) {
    EXPECT_EQ(e.variable(), 0u);
    EXPECT_EQ(e.step(), 3u);
  }
}

TEST(ValidateWindowSet, Gap) {
  try {
    validate_window_set(one_var({Window::range(0, 0, 3)}, 6), true);
    FAIL();
  } catch (const IncompleteCoverageError& e) {
    EXPECT_EQ(e.variable(), 0u);
    EXPECT_EQ(e.missing_steps(), (std::vector<std::size_t>{3, 4, 5}));
  }
  // Gaps are fine when no partition is required.
  EXPECT_NO_THROW(validate_window_set(one_var({Window::range(0, 0, 3)}, 6), false));
}

TEST(ValidateWindowSet, OutOfShape) {
  WindowSet ws{{Window::range(2, 0, 1)}, Shape{2, 3}, false};
  EXPECT_THROW(validate_window_set(ws, false), Error);
  WindowSet late{{Window::range(0, 2, 4)}, Shape{1, 3}, false};
  EXPECT_THROW(validate_window_set(late, false), Error);
}

TEST(ValidateWindowSet, AcceptsEveryStationaryPartition) {
  for (std::size_t L = 1; L <= 30; ++L)
    for (std::size_t l = 1; l <= L; ++l)
      EXPECT_NO_THROW(validate_window_set(stationary_partition(3, L, l), true))
          << L << " " << l;
}

TEST(DistributeWindowValues, EqualShares) {
  const Matrix m = distribute_window_values(
      Shape{1, 4}, {{Window::range(0, 0, 3), 3.0}, {Window::range(0, 3, 4), -1.0}});
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 3), -1.0);
}

TEST(Attribution, EfficiencyResidual) {
  Attribution a;
  a.base_value = 0.25;
  a.point_values = Matrix(1, 2, std::vector<double>{0.1, 0.2});
  a.prediction = 0.55;
  EXPECT_NEAR(a.efficiency_residual(), 0.0, 1e-15);
}

TEST(InstanceBatch, SetAndRead) {
  auto x = new_instance({{1, 2}, {3, 4}}, {"a", "b"});
  InstanceBatch batch(x.shape(), 2);
  batch.set(1, x);
  EXPECT_EQ(batch.instance(1)[3], 4.0);
  EXPECT_EQ(batch.instance(0)[0], 0.0);
  EXPECT_THROW(batch.set(0, new_instance({{1}}, {"a"})), Error);
}

}  // namespace
}  // namespace windowshap
