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

#include <cstdint>
#include <functional>
#include <optional>

#include "bnne/linalg.hpp"

namespace bnne {

struct OptBudget {
  int max_evals = 250;
  /// Offspring per generation; defaults to 4 + floor(3 ln n).
  std::optional<int> population;
  std::uint64_t seed = 0;
};

struct OptResult {
  VectorXd x;
  double value = 0.0;
  int evals = 0;
};

using Objective = std::function<double(const VectorXd&)>;

/// Derivative-free box-constrained minimization by a restarting (mu/mu_w, lambda)
/// covariance matrix adaptation evolution strategy. A short probe of the box
/// center, the vertices (low dimensions only) and a Latin hypercube picks the
/// first start (step 0.3 of the box width); after stagnation it restarts from
/// a random point with doubled population. Spends exactly `max_evals` evaluations and returns the best
/// point evaluated. Deterministic given the seed.
OptResult minimize(const Objective& f, const Box& box, const OptBudget& budget);

/// minimize applied to -f.
OptResult maximize(const Objective& f, const Box& box, const OptBudget& budget);

}  // namespace bnne
