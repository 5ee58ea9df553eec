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

#include "bnne/gp.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "bnne/sampling.hpp"

namespace bnne {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Pairwise squared coordinate differences, one t x t matrix per input dimension.
std::vector<MatrixXd> pairwise_sqdiff(const MatrixXd& X) {
  const Eigen::Index t = X.rows();
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index l = 0; l < X.cols(); ++l) {
    MatrixXd m(t, t);
    for (Eigen::Index q = 0; q < t; ++q)
      for (Eigen::Index p = 0; p < t; ++p) m(p, q) = (X(p, l) - X(q, l)) * (X(p, l) - X(q, l));
    out.push_back(std::move(m));
  }
  return out;
}

MatrixXd unit_se(const VectorXd& d, const std::vector<MatrixXd>& sq) {
  MatrixXd expo = MatrixXd::Zero(sq.front().rows(), sq.front().cols());
  for (std::size_t l = 0; l < sq.size(); ++l) expo -= 0.5 * d(static_cast<Eigen::Index>(l)) * sq[l];
  return expo.array().exp().matrix();
}

struct LmlTerms {
  double value = -std::numeric_limits<double>::infinity();
  VectorXd gradient;
};

LmlTerms lml_terms(const KernelParams& p, const std::vector<MatrixXd>& sq, const VectorXd& y,
                   bool with_gradient) {
  const auto t = y.size();
  const MatrixXd se = p.c * unit_se(p.d, sq);
  MatrixXd K = se;
  K.diagonal().array() += p.v;
  JitteredCholesky f = jittered_cholesky(std::move(K), p.prior_variance());
  const VectorXd alpha = f.llt.solve(y);
  const MatrixXd L = f.llt.matrixL();
  LmlTerms out;
  out.value = -0.5 * y.dot(alpha) - L.diagonal().array().log().sum() - 0.5 * static_cast<double>(t) * kLog2Pi;
  if (!with_gradient) return out;

  // d LML / d theta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)
  const MatrixXd W = alpha * alpha.transpose() - f.llt.solve(MatrixXd::Identity(t, t));
  const auto n = p.d.size();
  out.gradient.resize(n + 2);
  out.gradient(0) = 0.5 * p.v * W.trace();
  const MatrixXd Wse = W.cwiseProduct(se);
  out.gradient(1) = 0.5 * Wse.sum();
  for (Eigen::Index l = 0; l < n; ++l) {
    out.gradient(l + 2) = -0.25 * p.d(l) * Wse.cwiseProduct(sq[static_cast<std::size_t>(l)]).sum();
  }
  return out;
}

KernelParams from_log(const VectorXd& theta) {
  KernelParams p;
  p.v = std::exp(theta(0));
  p.c = std::exp(theta(1));
  p.d = theta.tail(theta.size() - 2).array().exp();
  return p;
}

// Projected limited-memory BFGS on a box. Minimizes f; infeasible or failing
// evaluations report +inf and are backtracked away from.
template <typename FG>
VectorXd minimize_box(const FG& fg, VectorXd x, const VectorXd& lo, const VectorXd& hi, int max_iter,
                      double& f_out) {
  constexpr std::size_t kMemory = 6;
  auto project = [&](const VectorXd& z) { return VectorXd(z.cwiseMax(lo).cwiseMin(hi)); };
  x = project(x);
  auto [f, g] = fg(x);
  if (!std::isfinite(f)) {
    f_out = f;
    return x;
  }
  std::deque<std::pair<VectorXd, VectorXd>> hist;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((x - project(x - g)).cwiseAbs().maxCoeff() < 1e-7) break;
    VectorXd gf = g;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if ((x(k) <= lo(k) && g(k) > 0) || (x(k) >= hi(k) && g(k) < 0)) gf(k) = 0.0;
    }
    // two-loop recursion
    VectorXd dir = -gf;
    std::vector<double> rho(hist.size()), a(hist.size());
    for (std::size_t k = hist.size(); k-- > 0;) {
      rho[k] = 1.0 / hist[k].second.dot(hist[k].first);
      a[k] = rho[k] * hist[k].first.dot(dir);
      dir -= a[k] * hist[k].second;
    }
    if (!hist.empty()) {
      const auto& [s, y] = hist.back();
      dir *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const double b = rho[k] * hist[k].second.dot(dir);
      dir += (a[k] - b) * hist[k].first;
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (gf(k) == 0.0 && g(k) != 0.0) dir(k) = 0.0;
    }
    if (gf.dot(dir) >= 0.0) {
      hist.clear();
      dir = -gf;
    }
    if (hist.empty()) {
      // scale the first step so it moves at most one unit in log space
      const double m = dir.cwiseAbs().maxCoeff();
      if (m > 1.0) dir /= m;
    }
    double step = 1.0;
    bool accepted = false;
    VectorXd x_new;
    double f_new = f;
    VectorXd g_new;
    for (int ls = 0; ls < 30; ++ls) {
      x_new = project(x + step * dir);
      auto [fv, gv] = fg(x_new);
      if (std::isfinite(fv) && fv <= f + 1e-4 * g.dot(x_new - x)) {
        f_new = fv;
        g_new = std::move(gv);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (hist.empty()) break;
      hist.clear();
      continue;
    }
    const VectorXd s = x_new - x;
    const VectorXd yv = g_new - g;
    const double df = f - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    if (s.dot(yv) > 1e-12) {
      hist.emplace_back(s, yv);
      if (hist.size() > kMemory) hist.pop_front();
    }
    if (df < 1e-10 * std::max(1.0, std::abs(f))) break;
  }
  f_out = f;
  return x;
}

}  // namespace

MatrixXd training_covariance(const KernelParams& p, const MatrixXd& train_x) {
  MatrixXd K = p.c * unit_se(p.d, pairwise_sqdiff(train_x));
  K.diagonal().array() += p.v;
  return K;
}

JitteredCholesky jittered_cholesky(MatrixXd K, double scale) {
  JitteredCholesky out;
  double jitter = 1e-10 * scale;
  const double max_jitter = 1e-4 * scale * (1.0 + 1e-9);
  for (; jitter <= max_jitter; jitter *= 10.0) {
    K.diagonal().array() += jitter - out.jitter;
    out.jitter = jitter;
    out.llt.compute(K);
    if (out.llt.info() == Eigen::Success && (out.llt.matrixLLT().diagonal().array() > 0.0).all()) {
      return out;
    }
  }
  throw NumericalError("covariance matrix is not positive definite after maximum jitter");
}

double log_marginal_likelihood(const KernelParams& p, const MatrixXd& train_x, const VectorXd& train_y) {
  if (train_x.rows() != train_y.size() || train_y.size() < 1) {
    throw DomainError("log_marginal_likelihood: need matching, non-empty inputs and targets");
  }
  if (train_x.cols() != p.d.size()) throw DomainError("log_marginal_likelihood: dimension mismatch");
  return lml_terms(p, pairwise_sqdiff(train_x), train_y, false).value;
}

LmlWithGradient log_marginal_likelihood_gradient(const KernelParams& p, const MatrixXd& train_x,
                                                 const VectorXd& train_y) {
  if (train_x.rows() != train_y.size() || train_y.size() < 1) {
    throw DomainError("log_marginal_likelihood: need matching, non-empty inputs and targets");
  }
  if (train_x.cols() != p.d.size()) throw DomainError("log_marginal_likelihood: dimension mismatch");
  LmlTerms terms = lml_terms(p, pairwise_sqdiff(train_x), train_y, true);
  return {terms.value, std::move(terms.gradient)};
}

PlayerSurrogate PlayerSurrogate::condition(const KernelParams& params, const MatrixXd& train_x,
                                           const VectorXd& train_y) {
  if (train_x.rows() != train_y.size() || train_y.size() < 1) {
    throw DomainError("PlayerSurrogate: need matching, non-empty inputs and targets");
  }
  if (train_x.cols() != params.d.size()) throw DomainError("PlayerSurrogate: dimension mismatch");
  PlayerSurrogate s;
  s.params_ = params;
  s.train_x_ = train_x;
  s.y_offset_ = train_y.mean();
  s.train_y_ = train_y.array() - s.y_offset_;
  JitteredCholesky f = jittered_cholesky(training_covariance(params, train_x), params.prior_variance());
  s.llt_ = std::move(f.llt);
  s.jitter_ = f.jitter;
  s.alpha_ = s.llt_.solve(s.train_y_);
  const MatrixXd L = s.llt_.matrixL();
  s.lml_ = -0.5 * s.train_y_.dot(s.alpha_) - L.diagonal().array().log().sum() -
           0.5 * static_cast<double>(train_y.size()) * kLog2Pi;
  return s;
}

PlayerSurrogate PlayerSurrogate::fit(const MatrixXd& train_x, const VectorXd& train_y, int restarts,
                                     Rng& rng, const KernelBounds& bounds) {
  if (train_x.rows() != train_y.size()) throw DomainError("fit: inputs and targets differ in length");
  if (train_y.size() < 2) throw DomainError("fit: at least two observations required");
  if (restarts < 0) throw DomainError("fit: restarts must be >= 0");
  const auto n = train_x.cols();
  const VectorXd y = train_y.array() - train_y.mean();
  const std::vector<MatrixXd> sq = pairwise_sqdiff(train_x);

  VectorXd lo(n + 2), hi(n + 2);
  lo << std::log(bounds.v_lo), std::log(bounds.c_lo), VectorXd::Constant(n, std::log(bounds.d_lo));
  hi << std::log(bounds.v_hi), std::log(bounds.c_hi), VectorXd::Constant(n, std::log(bounds.d_hi));

  int failures = 0;
  auto neg_lml = [&](const VectorXd& theta) -> std::pair<double, VectorXd> {
    try {
      LmlTerms terms = lml_terms(from_log(theta), sq, y, true);
      if (!std::isfinite(terms.value) || !terms.gradient.allFinite()) throw NumericalError("non-finite LML");
      return {-terms.value, -terms.gradient};
    } catch (const NumericalError&) {
      ++failures;
      return {std::numeric_limits<double>::infinity(), VectorXd::Zero(theta.size())};
    }
  };

  const MatrixXd starts = latin_hypercube(restarts + 1, Box{lo, hi}, rng);
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_theta;
  for (Eigen::Index k = 0; k < starts.rows(); ++k) {
    double f = 0.0;
    VectorXd theta = minimize_box(neg_lml, VectorXd(starts.row(k).transpose()), lo, hi, 100, f);
    if (f < best) {
      best = f;
      best_theta = std::move(theta);
    }
  }
  if (!std::isfinite(best)) {
    std::ostringstream msg;
    msg << "fit: all " << starts.rows() << " starts failed (" << failures
        << " failed likelihood evaluations, t=" << train_y.size() << ", n=" << n << ")";
    throw FitError(msg.str());
  }
  return condition(from_log(best_theta), train_x, train_y);
}

VectorXd PlayerSurrogate::cross_covariance(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != dim()) throw DomainError("PlayerSurrogate: query dimension mismatch");
  VectorXd k(size());
  for (int j = 0; j < size(); ++j) {
    const auto row = train_x_.row(j).transpose();
    k(j) = squared_exponential(params_, x, row);
    if ((row.array() == x.array()).all()) k(j) += params_.v;
  }
  return k;
}

double PlayerSurrogate::posterior_mean(const Eigen::Ref<const VectorXd>& x) const {
  return y_offset_ + cross_covariance(x).dot(alpha_);
}

double PlayerSurrogate::posterior_var(const Eigen::Ref<const VectorXd>& x) const {
  const VectorXd k = cross_covariance(x);
  const VectorXd w = llt_.matrixL().solve(k);
  return std::max(0.0, params_.prior_variance() - w.squaredNorm());
}

}  // namespace bnne
