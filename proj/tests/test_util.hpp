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

#include <cmath>
#include <functional>

#include "bnne/gp.hpp"
#include "bnne/sampling.hpp"

namespace bnne::testing {

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int k = 1; k < n; ++k) acc += f(a + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Surrogate conditioned on random data in [0,1]^dim with random hyperparameters.
inline PlayerSurrogate random_surrogate(Rng& rng, int t, int dim, double v) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  KernelParams p;
  p.v = v;
  p.c = 0.5 + unif(rng);
  p.d = VectorXd(dim);
  for (int l = 0; l < dim; ++l) p.d(l) = std::exp(std::log(0.5) + unif(rng) * std::log(40.0));
  MatrixXd X = latin_hypercube(t, dim, rng);
  VectorXd y(t);
  for (int j = 0; j < t; ++j) y(j) = std::sin(3.0 * X(j, 0)) + X.row(j).sum() + 0.1 * unif(rng);
  return PlayerSurrogate::condition(p, X, y);
}

}  // namespace bnne::testing
