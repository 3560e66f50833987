#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "vitalsforge/learners/dataset.hpp"

namespace vitalsforge::learners {

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

// gamma = 1 / (d * Var(all entries)), the "scale" heuristic.
inline double scale_gamma(const Dataset& d) {
  if (d.rows == 0 || d.cols == 0) return 1.0;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : d.x) {
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(d.x.size());
  const double var = sum_sq / n - (sum / n) * (sum / n);
  return var > 0.0 ? 1.0 / (static_cast<double>(d.cols) * var) : 1.0;
}

// Kernel decision function: sum_i coef_i K(sv_i, x) - rho.
struct KernelExpansion {
  Dataset support;
  std::vector<double> coef;
  double rho = 0.0;
  double gamma = 1.0;

  double decision(std::span<const double> x) const {
    double s = -rho;
    for (std::size_t i = 0; i < support.rows; ++i) s += coef[i] * rbf_kernel(support.row(i), x, gamma);
    return s;
  }
  friend bool operator==(const KernelExpansion&, const KernelExpansion&) = default;
};

struct SmoResult {
  std::vector<double> alpha;
  double rho = 0.0;
  double final_gap = 0.0;  // max violating-pair gap at exit
  long iterations = 0;
  bool converged = false;
};

// Solves  min 1/2 a'Qa + p'a  s.t.  y'a = 0, 0 <= a_i <= C
// with Q_ij = y_i y_j K(base(i), base(j)), base(i) = i mod n_base.
// Working sets use maximal violating pairs with second-order selection of the
// second index; stops when the gap m(a) - M(a) falls below tol.
class SmoSolver {
public:
  SmoSolver(const Dataset& x, double gamma, std::size_t cache_bytes = std::size_t{128} << 20)
      : x_(x), gamma_(gamma), n_base_(x.rows) {
    max_rows_ = std::max<std::size_t>(2, cache_bytes / std::max<std::size_t>(1, n_base_ * sizeof(double)));
    slot_.assign(n_base_, -1);
    diag_.resize(n_base_);
    for (std::size_t i = 0; i < n_base_; ++i) diag_[i] = rbf_kernel(x_.row(i), x_.row(i), gamma_);
  }

  SmoResult solve(std::span<const double> p, std::span<const double> y, double c, double tol, long max_iter) {
    const std::size_t l = p.size();
    SmoResult res;
    res.alpha.assign(l, 0.0);
    std::vector<double>& a = res.alpha;
    std::vector<double> g(p.begin(), p.end());
    auto base = [&](std::size_t i) { return i % n_base_; };
    auto upper = [&](std::size_t t) { return a[t] >= c; };
    auto lower = [&](std::size_t t) { return a[t] <= 0.0; };
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? !upper(t) : !lower(t); };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? !lower(t) : !upper(t); };
    constexpr double tau = 1e-12;

    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
      double gmax = -std::numeric_limits<double>::infinity();
      std::size_t i = l;
      for (std::size_t t = 0; t < l; ++t)
        if (in_up(t) && -y[t] * g[t] > gmax) {
          gmax = -y[t] * g[t];
          i = t;
        }
      double gmax2 = -std::numeric_limits<double>::infinity();
      std::size_t j = l;
      double best_obj = std::numeric_limits<double>::infinity();
      const double* ki = i < l ? row(base(i)) : nullptr;
      for (std::size_t t = 0; t < l; ++t) {
        if (!in_low(t)) continue;
        gmax2 = std::max(gmax2, y[t] * g[t]);
        if (i == l) continue;
        const double b = gmax + y[t] * g[t];
        if (b > 0.0) {
          double quad = diag_[base(i)] + diag_[base(t)] - 2.0 * ki[base(t)];
          if (quad <= 0.0) quad = tau;
          const double obj = -(b * b) / quad;
          if (obj < best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
      res.final_gap = gmax + gmax2;
      if (i == l || j == l || res.final_gap < tol) {
        res.converged = true;
        break;
      }
      update_pair(i, j, a, g, y, c);
    }
    if (res.iterations >= max_iter) res.final_gap = gap(a, g, y, c);
    res.rho = compute_rho(a, g, y, c);
    return res;
  }

  // Maximal violation of the KKT conditions for a given alpha, recomputing the
  // gradient from scratch.
  double kkt_gap(std::span<const double> alpha, std::span<const double> p, std::span<const double> y, double c) {
    const std::size_t l = p.size();
    std::vector<double> g(p.begin(), p.end());
    for (std::size_t j = 0; j < l; ++j) {
      if (alpha[j] == 0.0) continue;
      const double* kj = row(j % n_base_);
      for (std::size_t t = 0; t < l; ++t) g[t] += y[t] * y[j] * kj[t % n_base_] * alpha[j];
    }
    std::vector<double> a(alpha.begin(), alpha.end());
    return gap(a, g, y, c);
  }

private:
  // Kernel row for base index b; least-recently-used rows are recycled.
  const double* row(std::size_t b) {
    ++clock_;
    if (slot_[b] >= 0) {
      stamp_[static_cast<std::size_t>(slot_[b])] = clock_;
      return cache_[static_cast<std::size_t>(slot_[b])].data();
    }
    std::size_t s;
    if (cache_.size() < max_rows_) {
      cache_.emplace_back(n_base_);
      owner_.push_back(b);
      stamp_.push_back(0);
      s = cache_.size() - 1;
    } else {
      s = static_cast<std::size_t>(std::min_element(stamp_.begin(), stamp_.end()) - stamp_.begin());
      slot_[owner_[s]] = -1;
      owner_[s] = b;
    }
    stamp_[s] = clock_;
    slot_[b] = static_cast<long>(s);
    auto& r = cache_[s];
    const auto xb = x_.row(b);
    for (std::size_t t = 0; t < n_base_; ++t) r[t] = rbf_kernel(xb, x_.row(t), gamma_);
    return r.data();
  }

  double gap(const std::vector<double>& a, const std::vector<double>& g, std::span<const double> y, double c) const {
    double up = -std::numeric_limits<double>::infinity(), low = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < a.size(); ++t) {
      const bool at_upper = a[t] >= c, at_lower = a[t] <= 0.0;
      const bool is_up = y[t] > 0 ? !at_upper : !at_lower;
      const bool is_low = y[t] > 0 ? !at_lower : !at_upper;
      if (is_up) up = std::max(up, -y[t] * g[t]);
      if (is_low) low = std::max(low, y[t] * g[t]);
    }
    if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
    return up + low;
  }

  void update_pair(std::size_t i, std::size_t j, std::vector<double>& a, std::vector<double>& g,
                   std::span<const double> y, double c) {
    const std::size_t bi = i % n_base_, bj = j % n_base_;
    const double* ki = row(bi);
    const double* kj = row(bj);
    const double kij = ki[bj];
    const double old_ai = a[i], old_aj = a[j];
    if (y[i] != y[j]) {
      double quad = diag_[bi] + diag_[bj] - 2.0 * kij;  // Q_ii + Q_jj + 2 Q_ij with Q_ij = -K_ij
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else {
        if (a[i] < 0) {
          a[i] = 0;
          a[j] = -diff;
        }
      }
      if (diff > 0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else {
        if (a[j] > c) {
          a[j] = c;
          a[i] = c + diff;
        }
      }
    } else {
      double quad = diag_[bi] + diag_[bj] - 2.0 * kij;
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = sum;
        }
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else {
        if (a[i] < 0) {
          a[i] = 0;
          a[j] = sum;
        }
      }
    }
    const double dai = a[i] - old_ai, daj = a[j] - old_aj;
    for (std::size_t t = 0; t < a.size(); ++t) {
      const std::size_t bt = t % n_base_;
      g[t] += y[t] * (y[i] * ki[bt] * dai + y[j] * kj[bt] * daj);
    }
  }

  double compute_rho(const std::vector<double>& a, const std::vector<double>& g, std::span<const double> y,
                     double c) const {
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      const double yg = y[t] * g[t];
      if (a[t] >= c) {
        if (y[t] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (a[t] <= 0.0) {
        if (y[t] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    if (n_free > 0) return sum_free / static_cast<double>(n_free);
    if (!std::isfinite(ub) || !std::isfinite(lb)) return std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    return 0.5 * (ub + lb);
  }

  const Dataset& x_;
  double gamma_;
  std::size_t n_base_;
  std::size_t max_rows_ = 0;
  std::vector<double> diag_;
  std::vector<long> slot_;
  std::vector<std::vector<double>> cache_;
  std::vector<std::size_t> owner_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t clock_ = 0;
};

struct SvmFitInfo {
  double kkt_gap = 0.0;
  double tol = 0.0;
  long iterations = 0;
  bool converged = false;
  std::vector<double> alpha;  // dual variables, in training-row order (2n entries for SVR)
};

// C-SVC with labels mapped to +1 (class 1) / -1 (class 0).
inline KernelExpansion fit_svc(const Dataset& x, std::span<const int> labels, double c, double gamma, double tol,
                               long max_iter, SvmFitInfo* info = nullptr) {
  const std::size_t n = x.rows;
  if (labels.size() != n) throw std::invalid_argument("fit_svc: label count mismatch");
  std::vector<double> y(n), p(n, -1.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] ? 1.0 : -1.0;
  SmoSolver solver(x, gamma);
  SmoResult r = solver.solve(p, y, c, tol, max_iter);

  KernelExpansion out;
  out.gamma = gamma;
  out.rho = r.rho;
  out.support = Dataset(0, x.cols);
  for (std::size_t i = 0; i < n; ++i) {
    if (r.alpha[i] <= 0.0) continue;
    out.coef.push_back(r.alpha[i] * y[i]);
    out.support.x.insert(out.support.x.end(), x.row(i).begin(), x.row(i).end());
    ++out.support.rows;
  }
  if (info) *info = {r.final_gap, tol, r.iterations, r.converged, r.alpha};
  return out;
}

// Epsilon-insensitive support vector regression (2n dual variables).
inline KernelExpansion fit_svr(const Dataset& x, std::span<const double> target, double c, double epsilon,
                               double gamma, double tol, long max_iter, SvmFitInfo* info = nullptr) {
  const std::size_t n = x.rows;
  if (target.size() != n) throw std::invalid_argument("fit_svr: target count mismatch");
  std::vector<double> y(2 * n), p(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 1.0;
    p[i] = epsilon - target[i];
    y[i + n] = -1.0;
    p[i + n] = epsilon + target[i];
  }
  SmoSolver solver(x, gamma);
  SmoResult r = solver.solve(p, y, c, tol, max_iter);

  KernelExpansion out;
  out.gamma = gamma;
  out.rho = r.rho;
  out.support = Dataset(0, x.cols);
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = r.alpha[i] - r.alpha[i + n];
    if (beta == 0.0) continue;
    out.coef.push_back(beta);
    out.support.x.insert(out.support.x.end(), x.row(i).begin(), x.row(i).end());
    ++out.support.rows;
  }
  if (info) *info = {r.final_gap, tol, r.iterations, r.converged, r.alpha};
  return out;
}

}  // namespace vitalsforge::learners
