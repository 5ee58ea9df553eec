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
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bnne {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// A joint strategy: one real vector per player, concatenated.
using Profile = VectorXd;

/// All randomness flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

/// Independent stream `stream` of a run seeded with `seed`.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Contiguous coordinate range [offset, offset + size) owned by one player.
struct Block {
  int offset = 0;
  int size = 0;

  bool contains(int coord) const { return coord >= offset && coord < offset + size; }
};

/// Axis-aligned box [lower, upper].
struct Box {
  VectorXd lower;
  VectorXd upper;

  static Box unit(int dim) { return {VectorXd::Zero(dim), VectorXd::Ones(dim)}; }

  int dim() const { return static_cast<int>(lower.size()); }
  VectorXd width() const { return upper - lower; }
  VectorXd center() const { return 0.5 * (lower + upper); }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }

  template <typename Derived>
  VectorXd clip(const Eigen::MatrixBase<Derived>& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bnne
