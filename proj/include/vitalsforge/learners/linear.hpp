#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "vitalsforge/learners/dataset.hpp"

namespace vitalsforge::learners {

// score = intercept + coef . x
struct LinearState {
  double intercept = 0.0;
  std::vector<double> coef;

  double score(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * x[j];
    return s;
  }
  friend bool operator==(const LinearState&, const LinearState&) = default;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Dataset& d) {
  Eigen::MatrixXd m(d.rows, d.cols);
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols; ++c) m(r, c) = d(r, c);
  return m;
}

}  // namespace detail

struct LogisticFitInfo {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// L2-penalized binary logistic regression by damped Newton (IRLS) with
// backtracking. Objective: mean log-loss + l2/2 * |coef|^2; the intercept is
// not penalized.
inline LinearState fit_logistic(const Dataset& data, std::span<const int> y, double l2, int max_iter, double tol,
                                LogisticFitInfo* info = nullptr) {
  const std::size_t n = data.rows, d = data.cols;
  if (y.size() != n) throw std::invalid_argument("fit_logistic: label count mismatch");
  Eigen::MatrixXd x(n, d + 1);
  x.col(0).setOnes();
  x.rightCols(d) = detail::to_eigen(data);
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) target(i) = y[i] ? 1.0 : 0.0;

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, l2);
  penalty(0) = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd z = x * w;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // log(1 + exp(z)) - y z, evaluated stably
      const double zi = z(i);
      loss += (zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi))) - target(i) * zi;
    }
    return loss * inv_n + 0.5 * w.cwiseProduct(penalty).dot(w);
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  double f = objective(w);
  LogisticFitInfo local;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd z = x * w;
    Eigen::VectorXd p(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      h(i) = p(i) * (1.0 - p(i));
    }
    Eigen::VectorXd grad = x.transpose() * (p - target) * inv_n + penalty.cwiseProduct(w);
    local.gradient_norm = grad.norm();
    local.iterations = it;
    if (local.gradient_norm < tol) {
      local.converged = true;
      break;
    }
    Eigen::MatrixXd hess = x.transpose() * h.asDiagonal() * x * inv_n;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-10;
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) <= 0.0) step = grad;

    double t = 1.0;
    const double slope = grad.dot(step);
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd candidate = w - t * step;
      const double fc = objective(candidate);
      if (fc <= f - 1e-4 * t * slope) {
        w = candidate;
        f = fc;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      local.iterations = it + 1;
      break;
    }
    local.iterations = it + 1;
  }
  if (info) *info = local;

  LinearState s;
  s.intercept = w(0);
  s.coef.assign(w.data() + 1, w.data() + 1 + d);
  return s;
}

// Two-class LDA with pooled covariance. The returned linear score is the
// posterior log-odds of class 1.
inline LinearState fit_lda(const Dataset& data, std::span<const int> y, double shrinkage) {
  const std::size_t n = data.rows, d = data.cols;
  if (y.size() != n) throw std::invalid_argument("fit_lda: label count mismatch");
  Eigen::MatrixXd x = detail::to_eigen(data);
  std::size_t n1 = 0;
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(d), m1 = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i]) {
      m1 += x.row(i).transpose();
      ++n1;
    } else {
      m0 += x.row(i).transpose();
    }
  }
  const std::size_t n0 = n - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("fit_lda: both classes are required");
  m0 /= static_cast<double>(n0);
  m1 /= static_cast<double>(n1);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd c = x.row(i).transpose() - (y[i] ? m1 : m0);
    scatter.noalias() += c * c.transpose();
  }
  const double dof = n > 2 ? static_cast<double>(n - 2) : 1.0;
  Eigen::MatrixXd cov = scatter / dof;
  const double ridge = shrinkage * std::max(cov.trace() / static_cast<double>(d), 1e-12);
  cov.diagonal().array() += ridge;

  Eigen::VectorXd w = cov.ldlt().solve(m1 - m0);
  LinearState s;
  s.coef.assign(w.data(), w.data() + d);
  s.intercept = -0.5 * (m0 + m1).dot(w) + std::log(static_cast<double>(n1) / static_cast<double>(n0));
  return s;
}

// Ordinary least squares with an intercept. Rank-deficient designs resolve to
// the minimum-norm solution.
inline LinearState fit_least_squares(const Dataset& data, std::span<const double> y) {
  const std::size_t n = data.rows, d = data.cols;
  if (y.size() != n) throw std::invalid_argument("fit_least_squares: target count mismatch");
  Eigen::MatrixXd x(n, d + 1);
  x.col(0).setOnes();
  x.rightCols(d) = detail::to_eigen(data);
  Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(n));
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  Eigen::VectorXd w = cod.solve(target);
  LinearState s;
  s.intercept = w(0);
  s.coef.assign(w.data() + 1, w.data() + 1 + d);
  return s;
}

}  // namespace vitalsforge::learners
