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

#ifndef WINDOWSHAP_KERNELS_HPP_
#define WINDOWSHAP_KERNELS_HPP_

// Data-parallel inner loops of the engine.
//
// Every kernel exists twice: `serial` is the straightforward reference kept
// for testing and benchmarking, `parallel` is the OpenMP version used by the
// engine. Parallel kernels assign each output element to exactly one thread
// and sum in a fixed order, so their results do not depend on the thread
// count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace windowshap::kernels {

// Sampled coalitions of a kernel-weighted regression.
struct CoalitionDesign {
  std::size_t players = 0;
  // Present players of each coalition, sorted ascending.
  std::vector<std::vector<std::uint32_t>> members;
  std::vector<double> weights;
  // v(S) - v(empty) for each coalition.
  std::vector<double> targets;

  std::size_t size() const { return members.size(); }
};

// Normal equations of the efficiency-constrained regression, with the last
// player's coefficient eliminated (phi_last = total - sum of the others).
// `gram` is dim x dim row-major and fully populated.
struct NormalEquations {
  std::size_t dim = 0;
  std::vector<double> gram;
  std::vector<double> rhs;
};

namespace serial {

// out[b] = background[b] with the cells in `present_cells` taken from x_star.
// background and out hold `count` instances of x_star.size() cells each.
void fill_composites(std::span<const double> x_star,
                     std::span<const double> background,
                     std::span<const std::uint32_t> present_cells,
                     std::span<double> out);

// Expands every coalition into a dense row of the reduced design matrix.
NormalEquations reduced_normal_equations(const CoalitionDesign& design,
                                         double total);

// values[mask] = v(mask) for all 2^players coalitions (bit k = player k).
std::vector<double> exact_shapley_values(std::span<const double> values,
                                         std::size_t players);

// bias + <weights, instance> for each instance of the flat batch.
std::vector<double> linear_scores(std::span<const double> batch,
                                  std::span<const double> weights,
                                  double bias);

}  // namespace serial

namespace parallel {

void fill_composites(std::span<const double> x_star,
                     std::span<const double> background,
                     std::span<const std::uint32_t> present_cells,
                     std::span<double> out);

// Accumulates the binary Gram matrix from the smaller side of each
// coalition (members or their complement), then folds it into the reduced
// system. Cost per coalition is min(|S|, M - |S|)^2 instead of M^2.
NormalEquations reduced_normal_equations(const CoalitionDesign& design,
                                         double total);

std::vector<double> exact_shapley_values(std::span<const double> values,
                                         std::size_t players);

std::vector<double> linear_scores(std::span<const double> batch,
                                  std::span<const double> weights,
                                  double bias);

}  // namespace parallel

// Number of threads the parallel kernels will use.
int max_threads();

}  // namespace windowshap::kernels

#endif  // WINDOWSHAP_KERNELS_HPP_
