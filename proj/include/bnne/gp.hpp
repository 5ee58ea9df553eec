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
#include <string>

#include <Eigen/Cholesky>

#include "bnne/linalg.hpp"

namespace bnne {

/// Hyperparameters of k(x, x') = v 1{x = x'} + c exp(-(x - x')^T D (x - x') / 2)
/// with D diagonal (stored as its diagonal `d`, inverse squared length-scales).
struct KernelParams {
  double v = 1e-5;
  double c = 1.0;
  VectorXd d;

  double prior_variance() const { return v + c; }
};

/// Box constraints used when fitting, applied in log space.
struct KernelBounds {
  double v_lo = 1e-5, v_hi = 1e5;
  double c_lo = 1e-3, c_hi = 1e3;
  double d_lo = 1e-2, d_hi = 1e2;
};

template <typename A, typename B>
double squared_exponential(const KernelParams& p, const Eigen::MatrixBase<A>& x,
                           const Eigen::MatrixBase<B>& x2) {
  return p.c * std::exp(-0.5 * (p.d.array() * (x.derived() - x2.derived()).array().square()).sum());
}

/// Full kernel with Kronecker semantics for the white term: it contributes
/// only when the two inputs are coordinate-wise identical.
template <typename A, typename B>
double kernel_eval(const KernelParams& p, const Eigen::MatrixBase<A>& x,
                   const Eigen::MatrixBase<B>& x2) {
  if (x.size() != p.d.size() || x2.size() != p.d.size()) {
    throw DomainError("kernel_eval: input dimension does not match D");
  }
  const bool same = (x.derived().array() == x2.derived().array()).all();
  return (same ? p.v : 0.0) + squared_exponential(p, x, x2);
}

/// Training covariance: c * SE(X, X) + v * I. The white term is attached to
/// observation identity so repeated noisy profiles stay well posed.
MatrixXd training_covariance(const KernelParams& p, const MatrixXd& train_x);

/// Cholesky factor of K + jitter * I, escalating jitter from 1e-10 (c + v)
/// by factors of 10 up to 1e-4 (c + v).
struct JitteredCholesky {
  Eigen::LLT<MatrixXd> llt;
  double jitter = 0.0;
};
JitteredCholesky jittered_cholesky(MatrixXd K, double scale);

/// Zero-mean Gaussian log-density of `train_y` under K built from `p`.
double log_marginal_likelihood(const KernelParams& p, const MatrixXd& train_x, const VectorXd& train_y);

/// Value and gradient with respect to (log v, log c, log d_1, ..., log d_n).
struct LmlWithGradient {
  double value = 0.0;
  VectorXd gradient;
};
LmlWithGradient log_marginal_likelihood_gradient(const KernelParams& p, const MatrixXd& train_x,
                                                 const VectorXd& train_y);

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Fitted Gaussian-process surrogate of one player's payoff. Immutable;
/// all queries are const and thread-safe.
class PlayerSurrogate {
 public:
  /// Maximizes the log-marginal likelihood from (restarts + 1) Latin
  /// hypercube starts in log-parameter space and keeps the best.
  /// Targets are centered before fitting.
  static PlayerSurrogate fit(const MatrixXd& train_x, const VectorXd& train_y, int restarts, Rng& rng,
                             const KernelBounds& bounds = {});

  /// Conditions on the data with fixed hyperparameters (targets centered).
  static PlayerSurrogate condition(const KernelParams& params, const MatrixXd& train_x,
                                   const VectorXd& train_y);

  double posterior_mean(const Eigen::Ref<const VectorXd>& x) const;
  double posterior_var(const Eigen::Ref<const VectorXd>& x) const;
  double posterior_std(const Eigen::Ref<const VectorXd>& x) const { return std::sqrt(posterior_var(x)); }

  /// k(x) against every training input, white term by exact coincidence.
  VectorXd cross_covariance(const Eigen::Ref<const VectorXd>& x) const;

  const KernelParams& params() const { return params_; }
  const MatrixXd& train_x() const { return train_x_; }
  const VectorXd& train_y() const { return train_y_; }
  double y_offset() const { return y_offset_; }
  const VectorXd& alpha() const { return alpha_; }
  /// Lower-triangular factor of K + jitter * I.
  MatrixXd chol() const { return llt_.matrixL(); }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }
  int size() const { return static_cast<int>(train_x_.rows()); }
  int dim() const { return static_cast<int>(train_x_.cols()); }

 private:
  KernelParams params_;
  MatrixXd train_x_;
  VectorXd train_y_;
  double y_offset_ = 0.0;
  Eigen::LLT<MatrixXd> llt_;
  VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

}  // namespace bnne
