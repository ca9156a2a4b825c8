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

#include "windowshap/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#ifdef WINDOWSHAP_HAVE_OPENMP
#include <omp.h>
#endif

namespace windowshap::kernels {

namespace {

// Regions smaller than this run on the calling thread.
constexpr std::size_t kParallelGrain = 1 << 14;

// |S|! (M - |S| - 1)! / M! for |S| = 0..M-1.
std::vector<double> shapley_size_weights(std::size_t players) {
  std::vector<double> w(players);
  // 1 / (M * C(M-1, s)), with C built incrementally.
  double binom = 1.0;
  for (std::size_t s = 0; s < players; ++s) {
    w[s] = 1.0 / (static_cast<double>(players) * binom);
    binom = binom * static_cast<double>(players - 1 - s) /
            static_cast<double>(s + 1);
  }
  return w;
}

void fill_one(std::span<const double> x_star, const double* bg,
              std::span<const std::uint32_t> present_cells, double* dst) {
  std::memcpy(dst, bg, x_star.size() * sizeof(double));
  for (std::uint32_t c : present_cells) dst[c] = x_star[c];
}

}  // namespace

int max_threads() {
#ifdef WINDOWSHAP_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void fill_composites(std::span<const double> x_star,
                     std::span<const double> background,
                     std::span<const std::uint32_t> present_cells,
                     std::span<double> out) {
  const std::size_t cells = x_star.size();
  const std::size_t count = cells == 0 ? 0 : out.size() / cells;
  for (std::size_t b = 0; b < count; ++b) {
    fill_one(x_star, background.data() + b * cells, present_cells,
             out.data() + b * cells);
  }
}

NormalEquations reduced_normal_equations(const CoalitionDesign& design,
                                         double total) {
  const std::size_t m = design.players;
  const std::size_t dim = m - 1;
  NormalEquations eq{dim, std::vector<double>(dim * dim, 0.0),
                     std::vector<double>(dim, 0.0)};
  std::vector<double> row(m);
  for (std::size_t s = 0; s < design.size(); ++s) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::uint32_t p : design.members[s]) row[p] = 1.0;
    const double z_last = row[dim];
    const double b = design.targets[s] - z_last * total;
    const double w = design.weights[s];
    for (std::size_t j = 0; j < dim; ++j) {
      const double aj = row[j] - z_last;
      if (aj == 0.0) continue;
      eq.rhs[j] += w * aj * b;
      for (std::size_t k = j; k < dim; ++k) {
        eq.gram[j * dim + k] += w * aj * (row[k] - z_last);
      }
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      eq.gram[j * dim + k] = eq.gram[k * dim + j];
    }
  }
  return eq;
}

std::vector<double> exact_shapley_values(std::span<const double> values,
                                         std::size_t players) {
  const std::vector<double> w = shapley_size_weights(players);
  std::vector<double> phi(players, 0.0);
  const std::uint64_t full = std::uint64_t{1} << players;
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    const double weight = w[std::popcount(mask)];
    for (std::size_t k = 0; k < players; ++k) {
      const std::uint64_t bit = std::uint64_t{1} << k;
      if (mask & bit) continue;
      phi[k] += weight * (values[mask | bit] - values[mask]);
    }
  }
  return phi;
}

std::vector<double> linear_scores(std::span<const double> batch,
                                  std::span<const double> weights,
                                  double bias) {
  const std::size_t cells = weights.size();
  const std::size_t count = cells == 0 ? 0 : batch.size() / cells;
  std::vector<double> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double* x = batch.data() + n * cells;
    double acc = bias;
    for (std::size_t c = 0; c < cells; ++c) acc += weights[c] * x[c];
    out[n] = acc;
  }
  return out;
}

}  // namespace serial

namespace parallel {

void fill_composites(std::span<const double> x_star,
                     std::span<const double> background,
                     std::span<const std::uint32_t> present_cells,
                     std::span<double> out) {
  const std::size_t cells = x_star.size();
  const long long count =
      cells == 0 ? 0 : static_cast<long long>(out.size() / cells);
#pragma omp parallel for schedule(static) if (out.size() >= kParallelGrain)
  for (long long b = 0; b < count; ++b) {
    fill_one(x_star, background.data() + b * cells, present_cells,
             out.data() + b * cells);
  }
}

NormalEquations reduced_normal_equations(const CoalitionDesign& design,
                                         double total) {
  const std::size_t m = design.players;
  const std::size_t dim = m - 1;
  const std::size_t n = design.size();

  // Coalitions larger than M/2 are handled through their complement C:
  // z z^T = J - 1 c^T - c 1^T + c c^T.
  std::vector<char> complemented(n, 0);
  std::vector<std::vector<std::uint32_t>> complements(n);
#pragma omp parallel for schedule(dynamic, 64) if (n * m >= kParallelGrain)
  for (long long s = 0; s < static_cast<long long>(n); ++s) {
    const auto& members = design.members[s];
    if (2 * members.size() <= m) continue;
    complemented[s] = 1;
    auto& comp = complements[s];
    comp.reserve(m - members.size());
    std::size_t next = 0;
    for (std::uint32_t p = 0; p < m; ++p) {
      if (next < members.size() && members[next] == p) {
        ++next;
      } else {
        comp.push_back(p);
      }
    }
  }
  auto small_side = [&](std::size_t s) -> const std::vector<std::uint32_t>& {
    return complemented[s] ? complements[s] : design.members[s];
  };

  double alpha = 0.0;
  double gamma = 0.0;
  std::vector<double> beta(m, 0.0);
  std::vector<double> g(m, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double w = design.weights[s];
    const double wy = w * design.targets[s];
    if (complemented[s]) {
      alpha += w;
      gamma += wy;
      for (std::uint32_t p : complements[s]) {
        beta[p] += w;
        g[p] -= wy;
      }
    } else {
      for (std::uint32_t p : design.members[s]) g[p] += wy;
    }
  }
  for (std::size_t j = 0; j < m; ++j) g[j] += gamma;

  // Sparse part: each thread owns a contiguous block of rows.
  std::vector<double> gram(m * m, 0.0);
  const bool big = [&] {
    std::size_t work = 0;
    for (std::size_t s = 0; s < n && work < kParallelGrain; ++s) {
      work += small_side(s).size() * small_side(s).size();
    }
    return work >= kParallelGrain;
  }();
#pragma omp parallel if (big)
  {
    std::size_t tid = 0;
    std::size_t nthreads = 1;
#ifdef WINDOWSHAP_HAVE_OPENMP
    tid = static_cast<std::size_t>(omp_get_thread_num());
    nthreads = static_cast<std::size_t>(omp_get_num_threads());
#endif
    const auto lo = static_cast<std::uint32_t>(tid * m / nthreads);
    const auto hi = static_cast<std::uint32_t>((tid + 1) * m / nthreads);
    for (std::size_t s = 0; s < n; ++s) {
      const auto& side = small_side(s);
      const double w = design.weights[s];
      auto first = std::lower_bound(side.begin(), side.end(), lo);
      auto last = std::lower_bound(first, side.end(), hi);
      for (auto a = first; a != last; ++a) {
        double* row = gram.data() + static_cast<std::size_t>(*a) * m;
        for (std::uint32_t b : side) row[b] += w;
      }
    }
  }

  const long long mm = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * m >= kParallelGrain)
  for (long long j = 0; j < mm; ++j) {
    double* row = gram.data() + j * m;
    for (std::size_t k = 0; k < m; ++k) row[k] += alpha - beta[j] - beta[k];
  }

  NormalEquations eq{dim, std::vector<double>(dim * dim),
                     std::vector<double>(dim)};
  const std::size_t last = dim;
  const double g_ll = gram[last * m + last];
#pragma omp parallel for schedule(static) if (dim * dim >= kParallelGrain)
  for (long long j = 0; j < static_cast<long long>(dim); ++j) {
    const double g_jl = gram[j * m + last];
    for (std::size_t k = 0; k < dim; ++k) {
      eq.gram[j * dim + k] =
          gram[j * m + k] - g_jl - gram[k * m + last] + g_ll;
    }
    eq.rhs[j] = g[j] - g[last] - total * (g_jl - g_ll);
  }
  return eq;
}

std::vector<double> exact_shapley_values(std::span<const double> values,
                                         std::size_t players) {
  const std::vector<double> w = shapley_size_weights(players);
  std::vector<double> phi(players, 0.0);
  const std::uint64_t full = std::uint64_t{1} << players;
#pragma omp parallel for schedule(static) if (full * players >= kParallelGrain)
  for (long long k = 0; k < static_cast<long long>(players); ++k) {
    const std::uint64_t bit = std::uint64_t{1} << k;
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      acc += w[std::popcount(mask)] * (values[mask | bit] - values[mask]);
    }
    phi[k] = acc;
  }
  return phi;
}

std::vector<double> linear_scores(std::span<const double> batch,
                                  std::span<const double> weights,
                                  double bias) {
  const std::size_t cells = weights.size();
  const long long count =
      cells == 0 ? 0 : static_cast<long long>(batch.size() / cells);
  std::vector<double> out(count);
#pragma omp parallel for schedule(static) if (batch.size() >= kParallelGrain)
  for (long long n = 0; n < count; ++n) {
    const double* x = batch.data() + n * cells;
    double acc = bias;
    for (std::size_t c = 0; c < cells; ++c) acc += weights[c] * x[c];
    out[n] = acc;
  }
  return out;
}

}  // namespace parallel

}  // namespace windowshap::kernels
