#pragma once

// Random small convex programs for solver certification. Every program is
// bounded by construction (each scalar gets an upper-bound row, vectors carry
// modulus bounds, PSD blocks carry trace bounds) and feasible by calibration
// at a sampled interior point.

#include <cmath>
#include <string>
#include <vector>

#include "wpic/conic/program.hpp"
#include "wpic/rng.hpp"

namespace program_gen {

using wpic::Rng;
using namespace wpic::conic;

inline ConicProgram random_program(Rng& rng, bool give_hints) {
  ConicProgram prog;
  const int n_scalars = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
  const bool with_vector = rng.uniform() < 0.7;
  const bool with_psd = rng.uniform() < 0.5;
  const int vec_dim = 2 + static_cast<int>(rng.uniform() * 2.0);  // 2..3

  std::vector<ScalarVar> xs;
  std::vector<double> x_hat;  // interior point used to calibrate rows
  for (int i = 0; i < n_scalars; ++i) {
    ScalarVar s = prog.add_scalar("x" + std::to_string(i), true);
    double ub = 1.0 + 2.0 * rng.uniform();
    AffineExpr cap;
    cap.add(s, 1.0);
    prog.add_le(cap, ub);
    xs.push_back(s);
    x_hat.push_back(rng.uniform(0.2, 0.8) * ub);
    if (give_hints) prog.hint_scalar(s, x_hat.back());
  }

  VectorVar v{};
  Eigen::VectorXcd v_hat;
  if (with_vector) {
    v = prog.add_vector("v", vec_dim);
    v_hat = Eigen::VectorXcd::Zero(vec_dim);
    for (int e = 0; e < vec_dim; ++e) {
      prog.set_modulus_bound(v, e, 1.0);
      v_hat(e) = 0.4 * rng.uniform() * rng.random_phase();
    }
    if (rng.uniform() < 0.5) {
      prog.pin_entry(v, vec_dim - 1, 1.0);
      v_hat(vec_dim - 1) = 1.0;
    }
    if (give_hints) prog.hint_vector(v, v_hat);
  }

  PsdVar S{};
  if (with_psd) {
    S = prog.add_psd("S", 2);
    AffineExpr tr;
    tr.add_trace(S, Eigen::MatrixXcd::Identity(2, 2));
    prog.add_le(tr, 1.0 + rng.uniform());
  }

  // objective: random affine + up to two log terms over nonneg scalars
  AffineExpr obj;
  for (int i = 0; i < n_scalars; ++i) obj.add(xs[i], rng.gaussian());
  if (with_vector) {
    Eigen::VectorXcd a(vec_dim);
    for (int e = 0; e < vec_dim; ++e) a(e) = rng.complex_gaussian();
    obj.add_re_inner(v, a);
  }
  if (with_psd) {
    Eigen::MatrixXcd A(2, 2);
    A << rng.gaussian(), rng.complex_gaussian(), 0.0, rng.gaussian();
    A(1, 0) = std::conj(A(0, 1));
    obj.add_trace(S, A);
  }
  prog.set_objective(obj);

  int n_logs = static_cast<int>(rng.uniform() * 3.0);  // 0..2
  for (int t = 0; t < n_logs; ++t) {
    AffineExpr x_expr;
    x_expr.add(xs[static_cast<int>(rng.uniform() * n_scalars)], 0.5 + rng.uniform());
    double s = 0.5 + 1.5 * rng.uniform();
    if (rng.uniform() < 0.5) {
      prog.add_log_term(0.2 + rng.uniform(), 0.3 + 1.7 * rng.uniform(), x_expr, s);
    } else {
      ScalarVar d = xs[static_cast<int>(rng.uniform() * n_scalars)];
      prog.set_scalar_floor(d, 1e-12);
      prog.add_log_term(0.2 + rng.uniform(), d, x_expr, s);
    }
  }

  // coupling rows calibrated at the interior point
  int n_rows = 1 + static_cast<int>(rng.uniform() * 3.0);
  for (int r = 0; r < n_rows; ++r) {
    AffineExpr row;
    double at_hat = 0.0;
    for (int i = 0; i < n_scalars; ++i) {
      double c = rng.gaussian();
      row.add(xs[i], c);
      at_hat += c * x_hat[i];
    }
    if (with_vector && rng.uniform() < 0.5) {
      Eigen::VectorXcd a(vec_dim);
      for (int e = 0; e < vec_dim; ++e) a(e) = rng.complex_gaussian();
      row.add_re_inner(v, a);
      at_hat += (a.adjoint() * v_hat)(0).real();
    }
    prog.add_le(row, at_hat + 0.1 + rng.uniform());
  }

  // one convex quadratic constraint when a vector is present
  if (with_vector && rng.uniform() < 0.7) {
    Eigen::MatrixXcd B(vec_dim, vec_dim);
    for (int r = 0; r < vec_dim; ++r)
      for (int c = 0; c < vec_dim; ++c) B(r, c) = rng.complex_gaussian();
    Eigen::MatrixXcd Q = B * B.adjoint();
    double at_hat = (v_hat.adjoint() * Q * v_hat)(0).real();
    AffineExpr expr;
    double c0 = -(at_hat + 0.2 + rng.uniform());
    expr.add_const(c0);
    prog.add_quad_le(v, Q, expr);
  }

  return prog;
}

}  // namespace program_gen
