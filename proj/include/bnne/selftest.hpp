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
#include <string>
#include <vector>

#include "bnne/gp.hpp"

namespace bnne {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestOptions {
  std::uint64_t seed = 2024;
  int quadrature_instances = 50;
  int quadrature_instances_white = 20;
  int consistency_instances = 20;
  int samples = 100000;
};

/// Surrogate on [0,1]^2 whose posterior mean is (numerically) x_1, built by
/// dense pseudo-training with fixed hyperparameters. Player 1's mean over its
/// own action is 1/2 with standard deviation 1/sqrt(12).
PlayerSurrogate make_linear_fixture();

/// Closed-form integrals against adaptive quadrature, exact against sampled
/// moments, and the uniform-maximum recovery fixture.
std::vector<SelfTestCheck> run_selftest(const SelfTestOptions& opts = {});

}  // namespace bnne
