#pragma once

// Independent first-order reference solver used only by tests. It consumes
// the same compiled program data as the production interior-point method but
// shares none of its solution path: augmented-Lagrangian outer loop, projected
// gradient ascent inner loop, projections onto the simple variable sets
// (coordinate floors, modulus discs, the PSD cone).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wpic/conic/program.hpp"

namespace pg_oracle {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using wpic::conic::Compiled;

struct Result {
  VectorXd x;
  double objective = 0.0;
  double violation = 0.0;
  bool converged = false;
};

namespace detail {

inline double objective(const Compiled& P, const VectorXd& x) {
  double f = P.c.dot(x) + P.c0;
  for (const auto& t : P.log_terms) {
    double D = t.d_const + (t.d_var >= 0 ? t.d_coeff * x(t.d_var) : 0.0);
    if (D <= 1e-300) continue;
    double w = 1.0 + (t.u.dot(x) + t.u_const) / D;
    if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
    f += t.coeff * D * std::log2(w);
  }
  return f;
}

inline VectorXd objective_gradient(const Compiled& P, const VectorXd& x) {
  VectorXd g = P.c;
  for (const auto& t : P.log_terms) {
    double D = t.d_const + (t.d_var >= 0 ? t.d_coeff * x(t.d_var) : 0.0);
    if (D <= 1e-300) continue;
    double U = t.u.dot(x) + t.u_const;
    double r = U / D, w = 1.0 + r;
    double c2 = t.coeff / std::log(2.0);
    g += (c2 / w) * t.u;
    if (t.d_var >= 0) g(t.d_var) += c2 * (std::log(w) - r / w) * t.d_coeff;
  }
  return g;
}

// Soft constraint values g_i(x) <= 0 (rows and non-hard quads).
inline void soft_values(const Compiled& P, const VectorXd& x, std::vector<double>& vals) {
  vals.clear();
  for (const auto& r : P.rows) vals.push_back(r.a.dot(x) - r.b);
  for (const auto& q : P.quads) {
    if (q.hard) continue;
    int sz = static_cast<int>(q.support.size());
    VectorXd xs(sz);
    for (int i = 0; i < sz; ++i) xs(i) = x(q.support[i]);
    vals.push_back(xs.dot(q.Q * xs) + q.a.dot(x) + q.c);
  }
}

inline void add_soft_gradient(const Compiled& P, const VectorXd& x,
                              const std::vector<double>& weight, VectorXd& g) {
  std::size_t idx = 0;
  for (const auto& r : P.rows) {
    if (weight[idx] != 0.0) g -= weight[idx] * r.a;
    ++idx;
  }
  for (const auto& q : P.quads) {
    if (q.hard) continue;
    if (weight[idx] != 0.0) {
      int sz = static_cast<int>(q.support.size());
      VectorXd xs(sz);
      for (int i = 0; i < sz; ++i) xs(i) = x(q.support[i]);
      VectorXd gq = 2.0 * (q.Q * xs);
      for (int i = 0; i < sz; ++i) g(q.support[i]) -= weight[idx] * gq(i);
      g -= weight[idx] * q.a;
    }
    ++idx;
  }
}

inline void project(const Compiled& P, VectorXd& x) {
  for (int i = 0; i < P.n; ++i)
    if (!std::isnan(P.lower(i))) x(i) = std::max(x(i), P.lower(i));
  for (const auto& q : P.quads) {
    if (!q.hard) continue;  // modulus discs: Q = I over (re, im), c = -b^2
    double r2 = 0.0;
    for (int idx : q.support) r2 += x(idx) * x(idx);
    double b = std::sqrt(-q.c);
    if (r2 > b * b) {
      double scale = b / std::sqrt(r2);
      for (int idx : q.support) x(idx) *= scale;
    }
  }
  for (const auto& blk : P.psd_blocks) {
    MatrixXcd S = MatrixXcd::Zero(blk.dim, blk.dim);
    for (int m = 0; m < blk.dim; ++m) S(m, m) = x(blk.params[m]);
    int off = blk.dim;
    for (int p = 0; p < blk.dim; ++p)
      for (int q2 = p + 1; q2 < blk.dim; ++q2) {
        S(p, q2) = {x(blk.params[off]), x(blk.params[off + 1])};
        S(q2, p) = std::conj(S(p, q2));
        off += 2;
      }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(S);
    if (eig.eigenvalues().minCoeff() >= 0.0) continue;
    VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    MatrixXcd proj =
        eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
    for (int m = 0; m < blk.dim; ++m) x(blk.params[m]) = proj(m, m).real();
    off = blk.dim;
    for (int p = 0; p < blk.dim; ++p)
      for (int q2 = p + 1; q2 < blk.dim; ++q2) {
        x(blk.params[off]) = proj(p, q2).real();
        x(blk.params[off + 1]) = proj(p, q2).imag();
        off += 2;
      }
  }
}

}  // namespace detail

inline Result solve(const Compiled& P, int outer_iters = 40, int inner_iters = 4000) {
  Result res;
  VectorXd x = P.x0;
  detail::project(P, x);

  // Eigenvalue clipping projects in the Frobenius metric, which counts
  // off-diagonal parameters twice; the gradient steps must use the same
  // metric or the iteration stalls at non-stationary points.
  VectorXd metric = VectorXd::Ones(P.n);
  for (const auto& blk : P.psd_blocks)
    for (int a = blk.dim; a < blk.dim * blk.dim; ++a) metric(blk.params[a]) = 2.0;

  std::vector<double> g_vals;
  detail::soft_values(P, x, g_vals);
  std::vector<double> lambda(g_vals.size(), 0.0);
  std::vector<double> weight(g_vals.size(), 0.0);
  double rho = 10.0;
  double prev_violation = std::numeric_limits<double>::infinity();

  auto merit = [&](const VectorXd& y) {
    double f = detail::objective(P, y);
    if (!std::isfinite(f)) return f;
    detail::soft_values(P, y, g_vals);
    double pen = 0.0;
    for (std::size_t i = 0; i < g_vals.size(); ++i) {
      double t = std::max(0.0, lambda[i] + rho * g_vals[i]);
      pen += (t * t - lambda[i] * lambda[i]) / (2.0 * rho);
    }
    return f - pen;
  };

  for (int outer = 0; outer < outer_iters; ++outer) {
    // Spectral projected gradient (Barzilai-Borwein steps, non-monotone
    // Armijo over the last few merit values).
    auto gradient = [&](const VectorXd& y) {
      detail::soft_values(P, y, g_vals);
      for (std::size_t i = 0; i < g_vals.size(); ++i)
        weight[i] = std::max(0.0, lambda[i] + rho * g_vals[i]);
      VectorXd grad = detail::objective_gradient(P, y);
      detail::add_soft_gradient(P, y, weight, grad);
      return grad;
    };

    double alpha = 1.0;
    VectorXd grad = gradient(x);
    std::vector<double> recent;
    recent.push_back(merit(x));
    for (int inner = 0; inner < inner_iters; ++inner) {
      VectorXd trial = x + alpha * grad.cwiseQuotient(metric);
      detail::project(P, trial);
      VectorXd dir = trial - x;
      double slope = grad.dot(dir);
      if (dir.norm() <= 1e-13 * (1.0 + x.norm())) break;
      double ref = *std::max_element(recent.begin(), recent.end());

      double theta = 1.0;
      bool moved = false;
      while (theta > 1e-14) {
        VectorXd cand = x + theta * dir;
        if (theta < 1.0) detail::project(P, cand);  // theta=1 already projected
        double mc = merit(cand);
        if (std::isfinite(mc) && mc >= ref + 1e-4 * theta * slope) {
          VectorXd g_new = gradient(cand);
          VectorXd s = cand - x;
          VectorXd ydiff = grad - g_new;  // curvature of the maximized merit
          double sy = s.dot(ydiff);
          double ss = s.dot(metric.cwiseProduct(s));
          alpha = sy > 1e-300 ? std::min(std::max(ss / sy, 1e-10), 1e8) : 1.0;
          x = std::move(cand);
          grad = std::move(g_new);
          recent.push_back(mc);
          if (recent.size() > 10) recent.erase(recent.begin());
          moved = true;
          break;
        }
        theta *= 0.5;
      }
      if (!moved) break;
    }

    detail::soft_values(P, x, g_vals);
    double violation = 0.0;
    for (std::size_t i = 0; i < g_vals.size(); ++i) {
      lambda[i] = std::max(0.0, lambda[i] + rho * g_vals[i]);
      violation = std::max(violation, g_vals[i]);
    }
    if (violation <= 1e-10 && outer > 2) break;
    if (violation > 0.25 * prev_violation) rho = std::min(rho * 4.0, 1e10);
    prev_violation = violation;
  }

  res.x = x;
  res.objective = detail::objective(P, x);
  res.violation = P.primal_violation(x);
  res.converged = res.violation <= 1e-8;
  return res;
}

}  // namespace pg_oracle
