#include "wpic/conic/builders.hpp"

#include <cmath>

namespace wpic::conic {

namespace {

constexpr double kDeltaFloor = 1e-12;     // perspective floor inside the solver
constexpr double kCollapseFloor = 1e-10;  // phases treated as collapsed on un-substitution
constexpr double kSinrFloor = 1e-9;

// |w^H Psi v|^2 for fixed receive vector and reflection.
double beam_gain(const VectorXcd& w, const MatrixXcd& psi, const VectorXcd& v) {
  return std::norm(w.dot(psi * v));
}

// C_{k,i,j} = Psi^T S Psi* ; Hermitian PSD.
MatrixXcd energy_quadratic(const MatrixXcd& psi, const MatrixXcd& S) {
  MatrixXcd C = psi.transpose() * S * psi.conjugate();
  return 0.5 * (C + C.adjoint());
}

double quad_form(const MatrixXcd& C, const VectorXcd& v) {
  // v^T C v* (real for Hermitian C)
  return std::real((v.transpose() * C * v.conjugate())(0, 0));
}

std::string id2(const char* base, int a, int b) {
  return std::string(base) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

}  // namespace

TimePowerProgram build_time_power_sdp(const Allocation& alloc, const ChannelSet& channels,
                                      const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  const int K = scheme.K, J = scheme.phases(), M = alloc.M;
  const double ln2 = std::log(2.0);

  TimePowerProgram out;
  ConicProgram& prog = out.prog;

  // b_{k,i,j} for the receive pairs, at the fixed w and v.
  std::vector<std::vector<std::vector<double>>> b(
      K, std::vector<std::vector<double>>(K, std::vector<double>(J, 0.0)));
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < J; ++j) {
      if (!scheme.rx(i, j)) continue;
      for (int k = 0; k < K; ++k)
        if (scheme.tx(k, j)) b[k][i][j] = beam_gain(alloc.w[i][j], channels.psi[k][i], alloc.v[j]);
    }

  // A_{k,i,j} = (Psi v)* (Psi v)^T for the energy pairs.
  std::vector<std::vector<std::vector<MatrixXcd>>> A(
      K, std::vector<std::vector<MatrixXcd>>(K, std::vector<MatrixXcd>(J)));
  std::vector<std::vector<std::vector<double>>> a_trace(
      K, std::vector<std::vector<double>>(K, std::vector<double>(J, 0.0)));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      if (!scheme.harvests(k, j)) continue;
      for (int i = 0; i < K; ++i) {
        if (!scheme.hap_energy(i, j)) continue;
        VectorXcd u = channels.psi[k][i] * alloc.v[j];
        A[k][i][j] = u.conjugate() * u.transpose();
        a_trace[k][i][j] = u.squaredNorm();  // largest (only) eigenvalue
      }
    }

  out.delta_vars.resize(J);
  for (int j = 0; j < J; ++j) {
    out.delta_vars[j] = prog.add_scalar("delta_" + std::to_string(j), true, cfg.T);
    prog.set_scalar_floor(out.delta_vars[j], kDeltaFloor);
    prog.hint_scalar(out.delta_vars[j], 0.9 * alloc.delta[j] + 0.1 * cfg.T / (2.0 * J));
  }

  out.cov_vars.assign(K, std::vector<PsdVar>(J, PsdVar{}));
  for (int i = 0; i < K; ++i) {
    if (cfg.P[i] <= 0.0) continue;  // pinned zero covariances
    for (int j = 0; j < J; ++j) {
      if (!scheme.hap_energy(i, j)) continue;
      out.cov_vars[i][j] = prog.add_psd(id2("St", i, j), M, cfg.T * cfg.P[i]);
      MatrixXcd interior =
          (cfg.T / (2.0 * J)) * (cfg.P[i] / (2.0 * M)) * MatrixXcd::Identity(M, M);
      prog.hint_psd(out.cov_vars[i][j], 0.9 * (alloc.delta[j] * alloc.S[i][j]) + 0.1 * interior);
    }
  }

  // Largest harvestable energy per WD bounds the pt scale; WDs that cannot
  // harvest anything are pinned silent.
  std::vector<double> e_max(K, 0.0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      if (!scheme.harvests(k, j)) continue;
      for (int i = 0; i < K; ++i)
        if (scheme.hap_energy(i, j) && cfg.P[i] > 0.0)
          e_max[k] += cfg.eta * cfg.T * cfg.P[i] * a_trace[k][i][j];
    }

  out.pow_vars.assign(K, std::vector<ScalarVar>(J, ScalarVar{}));
  for (int k = 0; k < K; ++k) {
    if (e_max[k] <= 1e-300) continue;
    int n_tx = 0;
    for (int j = 0; j < J; ++j) n_tx += scheme.tx(k, j) ? 1 : 0;
    for (int j = 0; j < J; ++j) {
      if (!scheme.tx(k, j)) continue;
      out.pow_vars[k][j] = prog.add_scalar(id2("pt", k, j), true, e_max[k]);
      prog.hint_scalar(out.pow_vars[k][j], 0.9 * (alloc.delta[j] * alloc.p[k][j]) +
                                               0.1 * e_max[k] / (64.0 * n_tx));
    }
  }

  // Objective: for each receive pair, the perspective log plus the affine
  // pieces of the linearized interference bound.
  AffineExpr objective;
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < J; ++j) {
      if (!scheme.rx(i, j)) continue;
      AffineExpr x_expr;
      double interf_t = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!scheme.tx(k, j)) continue;
        if (out.pow_vars[k][j].id >= 0) x_expr.add(out.pow_vars[k][j], b[k][i][j]);
        if (k != i) interf_t += alloc.p[k][j] * b[k][i][j];
      }
      double denom = interf_t + cfg.sigma2[i];
      prog.add_log_term(1.0, out.delta_vars[j], x_expr, cfg.sigma2[i]);
      // -delta_j * g(p^t) and the first-order interference correction
      double slope_sum = 0.0;
      for (int k = 0; k < K; ++k) {
        if (k == i || !scheme.tx(k, j) || out.pow_vars[k][j].id < 0) continue;
        double slope = b[k][i][j] / (denom * ln2);
        objective.add(out.pow_vars[k][j], -slope);
        slope_sum += slope * alloc.p[k][j];
      }
      objective.add(out.delta_vars[j], -std::log2(denom) + slope_sum);
    }
  }
  prog.set_objective(objective);

  // Energy causality in the substituted variables.
  for (int k = 0; k < K; ++k) {
    bool any_pow = false;
    AffineExpr row;
    for (int j = 0; j < J; ++j) {
      if (scheme.tx(k, j) && out.pow_vars[k][j].id >= 0) {
        row.add(out.pow_vars[k][j], 1.0);
        any_pow = true;
      }
      if (scheme.harvests(k, j))
        for (int i = 0; i < K; ++i)
          if (scheme.hap_energy(i, j) && out.cov_vars[i][j].id >= 0)
            row.add_trace(out.cov_vars[i][j], -cfg.eta * A[k][i][j]);
    }
    if (any_pow) prog.add_le(row, 0.0);
  }

  // Per-phase trace bounds and the total-time budget.
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < J; ++j) {
      if (out.cov_vars[i][j].id < 0) continue;
      AffineExpr row;
      row.add_trace(out.cov_vars[i][j], MatrixXcd::Identity(M, M));
      row.add(out.delta_vars[j], -cfg.P[i]);
      prog.add_le(row, 0.0);
    }
  AffineExpr time_row;
  for (int j = 0; j < J; ++j) time_row.add(out.delta_vars[j], 1.0);
  prog.add_le(time_row, cfg.T);

  return out;
}

void TimePowerProgram::apply(const ConicSolution& sol, Allocation& alloc) const {
  const SchemeSpec& scheme = alloc.scheme;
  const int K = scheme.K, J = scheme.phases();
  std::vector<double> delta(J);
  for (int j = 0; j < J; ++j) delta[j] = prog.value_of(sol, delta_vars[j]);
  for (int j = 0; j < J; ++j) {
    if (delta[j] <= kCollapseFloor) {
      alloc.delta[j] = delta[j];
      continue;  // previous S, p carried forward; contribution is ~0
    }
    alloc.delta[j] = delta[j];
    for (int i = 0; i < K; ++i)
      if (cov_vars[i][j].id >= 0)
        alloc.S[i][j] = prog.value_of(sol, cov_vars[i][j]) / delta[j];
      else if (scheme.hap_energy(i, j))
        alloc.S[i][j].setZero();
    for (int k = 0; k < K; ++k)
      if (pow_vars[k][j].id >= 0)
        alloc.p[k][j] = std::max(0.0, prog.value_of(sol, pow_vars[k][j]) / delta[j]);
      else if (scheme.tx(k, j))
        alloc.p[k][j] = 0.0;
  }
}

V1Program build_v1_qcp(const Allocation& alloc, const ChannelSet& channels,
                       const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  const int K = scheme.K, J = scheme.phases(), Nv = alloc.Nv;

  V1Program out;
  ConicProgram& prog = out.prog;
  const double delta0 = alloc.delta[0];
  const VectorXcd& v0 = alloc.v[0];

  out.v1 = prog.add_vector("v1", Nv);
  for (int n = 0; n + 1 < Nv; ++n) prog.set_modulus_bound(out.v1, n, 1.0);
  prog.pin_entry(out.v1, Nv - 1, 1.0);
  prog.hint_vector(out.v1, v0);

  // Per WD: spent energy, the fixed later-phase harvest, and the phase-0
  // energy quadratics.
  out.residual_vars.assign(K, ScalarVar{});
  AffineExpr objective;
  bool any_effect = false;
  for (int k = 0; k < K; ++k) {
    double spent = 0.0;
    for (int j = 0; j < J; ++j)
      if (scheme.tx(k, j)) spent += alloc.delta[j] * alloc.p[k][j];
    double later = 0.0;
    for (int j = 1; j < J; ++j)
      if (scheme.harvests(k, j)) later += harvested_energy(k, j, alloc, channels, cfg);

    AffineExpr row;
    double ub = -spent + later;   // maximum of rhs - lhs over the box
    double cur = -spent + later;  // value at the local point
    if (delta0 > kDeltaFloor) {
      for (int i = 0; i < K; ++i) {
        if (!scheme.hap_energy(i, 0)) continue;
        MatrixXcd C = energy_quadratic(channels.psi[k][i], alloc.S[i][0]);
        double q0 = quad_form(C, v0);
        VectorXcd a = 2.0 * (C.transpose() * v0);
        row.add_re_inner(out.v1, -cfg.eta * delta0 * a);
        row.add_const(cfg.eta * delta0 * q0);
        cur += cfg.eta * delta0 * q0;
        // max of Re{a^H v} over the box: co-phased free entries, pinned last
        double reach = std::real(std::conj(a(Nv - 1)) * 1.0);
        for (int n = 0; n + 1 < Nv; ++n) reach += std::abs(a(n));
        ub += cfg.eta * delta0 * (reach - q0);
        if (a.cwiseAbs().maxCoeff() > 0.0) any_effect = true;
      }
    }

    if (ub <= 1e-300) {
      // residual pinned at zero; the row stays to constrain v1 if non-constant
      row.add_const(spent - later);
      prog.add_le(row, 0.0);
      continue;
    }
    double scale = std::max({cur, ub * 1e-3, 1e-30});
    out.residual_vars[k] = prog.add_scalar("residual_" + std::to_string(k), true, scale);
    prog.hint_scalar(out.residual_vars[k], std::max(0.5 * cur, 1e-6 * scale));
    objective.add(out.residual_vars[k], 1.0);
    row.add(out.residual_vars[k], 1.0);
    row.add_const(spent - later);
    prog.add_le(row, 0.0);
  }
  prog.set_objective(objective);
  out.trivial = !any_effect;
  return out;
}

void V1Program::apply(const ConicSolution& sol, Allocation& alloc) const {
  alloc.v[0] = prog.value_of(sol, v1);
}

double V1Program::residual(const ConicSolution& sol, int k) const {
  if (residual_vars[k].id < 0) return 0.0;
  return prog.value_of(sol, residual_vars[k]);
}

VhatProgram build_vhat_qcp(const Allocation& alloc, const ChannelSet& channels,
                           const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  const int K = scheme.K, J = scheme.phases(), Nv = alloc.Nv;

  VhatProgram out;
  ConicProgram& prog = out.prog;

  out.v_vars.assign(J, VectorVar{});
  for (int j = 1; j < J; ++j) {
    out.v_vars[j] = prog.add_vector("v_" + std::to_string(j), Nv);
    for (int n = 0; n + 1 < Nv; ++n) prog.set_modulus_bound(out.v_vars[j], n, 1.0);
    prog.pin_entry(out.v_vars[j], Nv - 1, 1.0);
    prog.hint_vector(out.v_vars[j], alloc.v[j]);
  }

  // Rate pairs with their SINR slacks; pairs with numerically zero local
  // SINR are dropped (their first-order bound has zero gradient).
  AffineExpr objective;
  for (int i = 0; i < K; ++i) {
    for (int j = 1; j < J; ++j) {
      if (!scheme.rx(i, j) || alloc.delta[j] <= kDeltaFloor) continue;
      VectorXcd u_sig = channels.psi[i][i].adjoint() * alloc.w[i][j];
      double p_sig = alloc.p[i][j];
      double q_sig = p_sig * std::norm(u_sig.dot(alloc.v[j]));
      double local = sinr(i, j, alloc, channels, cfg);
      if (q_sig <= 1e-300 || local < kSinrFloor) continue;
      double z_t = std::max(local, kSinrFloor);

      VhatProgram::RatePair pair;
      pair.i = i;
      pair.j = j;
      pair.z_local = z_t;
      pair.z = prog.add_scalar(id2("z", i, j), true, std::max(z_t, 1e-3));
      prog.hint_scalar(pair.z, 0.9 * z_t);

      AffineExpr z_expr;
      z_expr.add(pair.z, 1.0);
      prog.add_log_term(1.0, alloc.delta[j], z_expr, 1.0);

      // interference quadratic + sigma^2 - F^lb(v_j, z) <= 0
      MatrixXcd Q = MatrixXcd::Zero(Nv, Nv);
      for (int k = 0; k < K; ++k) {
        if (k == i || !scheme.tx(k, j) || alloc.p[k][j] <= 0.0) continue;
        VectorXcd u = channels.psi[k][i].adjoint() * alloc.w[i][j];
        Q += alloc.p[k][j] * (u * u.adjoint());
      }
      VectorXcd b_sig = p_sig * (u_sig * (u_sig.dot(alloc.v[j])));  // B v^t
      AffineExpr affine;
      affine.add_const(cfg.sigma2[i]);
      affine.add_re_inner(out.v_vars[j], -(2.0 / z_t) * b_sig);
      affine.add(pair.z, q_sig / (z_t * z_t));
      prog.add_quad_le(out.v_vars[j], Q, affine);

      out.pairs.push_back(pair);
    }
  }
  if (out.pairs.empty()) {
    out.trivial = true;
    return out;
  }
  prog.set_objective(objective);

  // Linearized energy causality; phase-0 harvest enters as a constant at the
  // current v_1.
  for (int k = 0; k < K; ++k) {
    double spent = 0.0;
    for (int j = 0; j < J; ++j)
      if (scheme.tx(k, j)) spent += alloc.delta[j] * alloc.p[k][j];
    double phase0 = scheme.harvests(k, 0) ? harvested_energy(k, 0, alloc, channels, cfg) : 0.0;
    AffineExpr row;
    row.add_const(spent - phase0);
    bool has_var = false;
    for (int j = 1; j < J; ++j) {
      if (!scheme.harvests(k, j) || alloc.delta[j] <= kDeltaFloor) continue;
      for (int i = 0; i < K; ++i) {
        if (!scheme.hap_energy(i, j)) continue;
        MatrixXcd C = energy_quadratic(channels.psi[k][i], alloc.S[i][j]);
        double q = quad_form(C, alloc.v[j]);
        VectorXcd a = 2.0 * (C.transpose() * alloc.v[j]);
        row.add_re_inner(out.v_vars[j], -cfg.eta * alloc.delta[j] * a);
        row.add_const(cfg.eta * alloc.delta[j] * q);
        if (a.cwiseAbs().maxCoeff() > 0.0) has_var = true;
      }
    }
    if (has_var || spent - phase0 > 0.0) prog.add_le(row, 0.0);
  }

  return out;
}

void VhatProgram::apply(const ConicSolution& sol, Allocation& alloc) const {
  for (int j = 1; j < alloc.phases(); ++j)
    if (v_vars[j].id >= 0) alloc.v[j] = prog.value_of(sol, v_vars[j]);
}

}  // namespace wpic::conic
