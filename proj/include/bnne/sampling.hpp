/*
 * Copyright 2026 The bnne Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "bnne/linalg.hpp"

namespace bnne {

/// Latin hypercube sample of `n` points in [0,1]^dim (one point per row).
/// Along every coordinate the n values fall in distinct strata
/// [k/n, (k+1)/n), uniformly jittered within each stratum.
inline MatrixXd latin_hypercube(int n, int dim, Rng& rng) {
  if (n < 1 || dim < 1) throw std::invalid_argument("latin_hypercube: n and dim must be >= 1");
  MatrixXd out(n, dim);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k < n; ++k) out(k, j) = (perm[static_cast<std::size_t>(k)] + unif(rng)) / n;
  }
  return out;
}

/// Latin hypercube sample mapped affinely into `box`.
inline MatrixXd latin_hypercube(int n, const Box& box, Rng& rng) {
  MatrixXd unit = latin_hypercube(n, box.dim(), rng);
  return (unit.array().rowwise() * box.width().transpose().array()).rowwise() +
         box.lower.transpose().array();
}

}  // namespace bnne
