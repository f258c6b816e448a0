#include "wpic/conic/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace wpic::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared evaluation state for one candidate point. In phase I the last
// coordinate is the relaxation level s and the soft constraints read
// g(x) - s <= 0; hard barriers (floors, modulus, PSD) never see s.
struct Evaluator {
  const Compiled& P;
  bool phase1;
  int dim;  // P.n (+1 in phase I)

  explicit Evaluator(const Compiled& prog, bool phase1_)
      : P(prog), phase1(phase1_), dim(prog.n + (phase1_ ? 1 : 0)) {}

  double s_of(const VectorXd& y) const { return phase1 ? y(P.n) : 0.0; }

  // Objective being maximized: the program objective in phase II, -s in phase I.
  double f(const VectorXd& y) const {
    if (phase1) return -y(P.n);
    return P.objective(y.head(P.n));
  }

  double quad_value(const Compiled::Quad& q, const VectorXd& y) const {
    int sz = static_cast<int>(q.support.size());
    VectorXd xs(sz);
    for (int i = 0; i < sz; ++i) xs(i) = y(q.support[i]);
    return xs.dot(q.Q * xs) + q.a.dot(y.head(P.n)) + q.c;
  }

  // Barrier value; +inf when y is outside the domain.
  double barrier(const VectorXd& y) const {
    double s = s_of(y), phi = 0.0;
    for (const auto& r : P.rows) {
      double slack = r.b - r.a.dot(y.head(P.n)) + s;
      if (!(slack > 0.0)) return kInf;
      phi -= std::log(slack);
    }
    for (const auto& q : P.quads) {
      double slack = -quad_value(q, y) + (q.hard ? 0.0 : s);
      if (!(slack > 0.0)) return kInf;
      phi -= std::log(slack);
    }
    for (int i = 0; i < P.n; ++i) {
      if (std::isnan(P.lower(i))) continue;
      double slack = y(i) - P.lower(i);
      if (!(slack > 0.0)) return kInf;
      phi -= std::log(slack);
    }
    for (const auto& blk : P.psd_blocks) {
      Eigen::LLT<MatrixXcd> llt(P.psd_matrix(blk, y));
      if (llt.info() != Eigen::Success) return kInf;
      double logdet = 0.0;
      for (int m = 0; m < blk.dim; ++m) logdet += std::log(std::real(llt.matrixL()(m, m)));
      phi -= 2.0 * logdet;
    }
    if (!phase1) {
      for (const auto& t : P.log_terms) {
        double D = t.d_const + (t.d_var >= 0 ? t.d_coeff * y(t.d_var) : 0.0);
        if (D <= 1e-300) continue;
        double w = 1.0 + (t.u.dot(y.head(P.n)) + t.u_const) / D;
        if (!(w > 0.0)) return kInf;
      }
    }
    return phi;
  }

  // psi = t*f - barrier; -inf outside the domain.
  double psi(const VectorXd& y, double t) const {
    double phi = barrier(y);
    if (!std::isfinite(phi)) return -kInf;
    return t * f(y) - phi;
  }

  // Gradient and Hessian of psi; assumes y strictly feasible.
  void derivatives(const VectorXd& y, double t, VectorXd& grad, MatrixXd& hess) const {
    grad = VectorXd::Zero(dim);
    hess = MatrixXd::Zero(dim, dim);
    double s = s_of(y);

    if (phase1) {
      grad(P.n) = -t;
    } else {
      grad.head(P.n) = t * P.c;
      for (const auto& lt : P.log_terms) {
        double D = lt.d_const + (lt.d_var >= 0 ? lt.d_coeff * y(lt.d_var) : 0.0);
        if (D <= 1e-300) continue;
        double U = lt.u.dot(y.head(P.n)) + lt.u_const;
        double r = U / D, w = 1.0 + r;
        double c2 = lt.coeff / std::log(2.0);  // value = c2 * D * ln(w)
        grad.head(P.n) += t * (c2 / w) * lt.u;
        VectorXd q = lt.u;
        if (lt.d_var >= 0) {
          grad(lt.d_var) += t * c2 * (std::log(w) - r / w) * lt.d_coeff;
          q(lt.d_var) -= r * lt.d_coeff;
        }
        // term Hessian is -(c2/(D w^2)) q q^T with q = u - r*d
        hess.topLeftCorner(P.n, P.n).noalias() -= (t * c2 / (D * w * w)) * q * q.transpose();
      }
    }

    VectorXd sg(dim);
    for (const auto& r : P.rows) {
      double slack = r.b - r.a.dot(y.head(P.n)) + s;
      sg.setZero();
      sg.head(P.n) = -r.a;
      if (phase1) sg(P.n) = 1.0;
      grad.noalias() += sg / slack;
      hess.noalias() -= sg * sg.transpose() / (slack * slack);
    }
    for (const auto& q : P.quads) {
      double slack = -quad_value(q, y) + (q.hard ? 0.0 : s);
      int sz = static_cast<int>(q.support.size());
      VectorXd xs(sz);
      for (int i = 0; i < sz; ++i) xs(i) = y(q.support[i]);
      VectorXd gq_sup = 2.0 * (q.Q * xs);
      sg.setZero();
      sg.head(P.n) = -q.a;
      for (int i = 0; i < sz; ++i) sg(q.support[i]) -= gq_sup(i);
      if (phase1 && !q.hard) sg(P.n) = 1.0;
      grad.noalias() += sg / slack;
      hess.noalias() -= sg * sg.transpose() / (slack * slack);
      for (int a = 0; a < sz; ++a)
        for (int b = 0; b < sz; ++b) hess(q.support[a], q.support[b]) -= 2.0 * q.Q(a, b) / slack;
    }
    for (int i = 0; i < P.n; ++i) {
      if (std::isnan(P.lower(i))) continue;
      double slack = y(i) - P.lower(i);
      grad(i) += 1.0 / slack;
      hess(i, i) -= 1.0 / (slack * slack);
    }
    for (const auto& blk : P.psd_blocks) {
      MatrixXcd Sinv = P.psd_matrix(blk, y).inverse();
      int M = blk.dim;
      int np = M * M;
      auto trace_map = [M](const MatrixXcd& H, VectorXd& out) {
        for (int m = 0; m < M; ++m) out(m) = H(m, m).real();
        int off = M;
        for (int p = 0; p < M; ++p)
          for (int q2 = p + 1; q2 < M; ++q2) {
            out(off) = 2.0 * H(p, q2).real();
            out(off + 1) = 2.0 * H(p, q2).imag();
            off += 2;
          }
      };
      VectorXd tr_inv(np);
      trace_map(Sinv, tr_inv);
      for (int a = 0; a < np; ++a) grad(blk.params[a]) += tr_inv(a);

      std::vector<MatrixXcd> G(np, MatrixXcd::Zero(M, M));
      for (int m = 0; m < M; ++m) G[m](m, m) = 1.0;
      int off = M;
      for (int p = 0; p < M; ++p)
        for (int q2 = p + 1; q2 < M; ++q2) {
          G[off](p, q2) = 1.0;
          G[off](q2, p) = 1.0;
          G[off + 1](p, q2) = std::complex<double>(0.0, 1.0);
          G[off + 1](q2, p) = std::complex<double>(0.0, -1.0);
          off += 2;
        }
      VectorXd hrow(np);
      for (int a = 0; a < np; ++a) {
        MatrixXcd Y = Sinv * G[a] * Sinv;
        trace_map(Y, hrow);
        for (int b = 0; b < np; ++b) hess(blk.params[a], blk.params[b]) -= hrow(b);
      }
    }
  }
};

struct CenterResult {
  double stationarity = kInf;  // ||grad psi|| / t at exit
  bool centered = false;
};

// Newton-centers psi(., t). Backtracks on a merit test while the decrement is
// large, then switches to pure Newton steps (domain check only) where the
// merit comparison would drown in floating-point noise. `strict` drives the
// decrement to the fp floor for the final stage.
CenterResult center(const Evaluator& ev, VectorXd& y, double t, int& iters, int max_iter,
                    bool strict) {
  CenterResult res;
  VectorXd grad, step;
  MatrixXd hess;
  double lambda2_prev = kInf;
  while (iters < max_iter) {
    ev.derivatives(y, t, grad, hess);
    res.stationarity = grad.norm() / t;
    MatrixXd A = -hess;
    // Jacobi equilibration keeps the factorization usable when active-set
    // slacks make the raw system condition blow up with t.
    VectorXd d = A.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    MatrixXd As = d.asDiagonal() * A * d.asDiagonal();
    VectorXd gs = d.asDiagonal() * grad;
    // The decrement is evaluated in the equilibrated frame (gs.zs == grad.step
    // exactly, but without the cancellation across disparate scales).
    double lambda2 = -1.0;
    {
      Eigen::LDLT<MatrixXd> ldlt(As + 1e-14 * MatrixXd::Identity(ev.dim, ev.dim));
      if (ldlt.info() == Eigen::Success) {
        VectorXd zs = ldlt.solve(gs);
        for (int refine = 0; refine < 3; ++refine) zs += ldlt.solve(gs - As * zs);
        step = d.asDiagonal() * zs;
        lambda2 = gs.dot(zs);
        if (!std::isfinite(lambda2) || !step.allFinite()) lambda2 = -1.0;
      }
    }
    if (lambda2 < 0.0) {
      // spectral pseudo-solve: decrement nonnegative by construction
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(As);
      if (eig.info() != Eigen::Success) return res;
      double lam_max = eig.eigenvalues().cwiseAbs().maxCoeff();
      double floor_ev = std::max(1e-14 * lam_max, 1e-300);
      VectorXd inv = (eig.eigenvalues().array().max(floor_ev)).inverse().matrix();
      VectorXd proj = eig.eigenvectors().transpose() * gs;
      VectorXd zs = eig.eigenvectors() * inv.cwiseProduct(proj);
      step = d.asDiagonal() * zs;
      lambda2 = proj.cwiseAbs2().dot(inv);
      if (!std::isfinite(lambda2) || lambda2 < 0.0 || !step.allFinite())
        return res;  // numerically stuck
    }

    double target = strict ? 1e-15 : 1e-10;
    if (0.5 * lambda2 <= target) {
      res.centered = true;
      return res;
    }
    if (lambda2 >= 0.9 * lambda2_prev && 0.5 * lambda2 <= 1e-7) {
      res.centered = true;  // fp floor; gap bound still holds at this decrement
      return res;
    }
    lambda2_prev = lambda2;

    ++iters;
    if (lambda2 <= 0.05) {
      // Pure Newton region: backtrack on domain membership only; the merit
      // comparison would drown in fp noise at t*f scale.
      double alpha = 1.0;
      bool moved = false;
      while (alpha > 1e-14) {
        VectorXd cand = y + alpha * step;
        if (std::isfinite(ev.psi(cand, t))) {
          y = std::move(cand);
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) return res;
      continue;
    }
    double psi0 = ev.psi(y, t);
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-14) {
      VectorXd cand = y + alpha * step;
      double psic = ev.psi(cand, t);
      if (std::isfinite(psic) && psic >= psi0 + 0.25 * alpha * lambda2) {
        y = std::move(cand);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return res;  // merit test noise floor
  }
  return res;
}

// KKT residual at x, taking the barrier duals (near-exact at a deep center)
// and least-squares-polishing the small remaining stationarity defect over
// the active constraint gradients. PSD dual corrections absorb their own
// coordinates; their dual feasibility and complementarity join the residual.
double kkt_residual(const Compiled& P, const Evaluator& ev, const VectorXd& x, double t) {
  VectorXd grad;
  MatrixXd hess;
  ev.derivatives(x, t, grad, hess);
  VectorXd r = grad / t;  // = objective gradient minus barrier-dual combination

  // active columns with their barrier multipliers
  std::vector<VectorXd> cols;
  std::vector<double> lam_b;
  std::vector<double> sigma;
  const double active_tol = 3e-3;
  for (const auto& row : P.rows) {
    double slack = row.b - row.a.dot(x);
    if (slack <= active_tol) {
      cols.push_back(row.a);
      lam_b.push_back(1.0 / (t * slack));
      sigma.push_back(slack);
    }
  }
  for (const auto& q : P.quads) {
    double slack = -ev.quad_value(q, x);
    if (slack > active_tol) continue;
    int sz = static_cast<int>(q.support.size());
    VectorXd xs(sz);
    for (int i = 0; i < sz; ++i) xs(i) = x(q.support[i]);
    VectorXd gq_sup = 2.0 * (q.Q * xs);
    VectorXd gq = q.a;
    for (int i = 0; i < sz; ++i) gq(q.support[i]) += gq_sup(i);
    cols.push_back(std::move(gq));
    lam_b.push_back(1.0 / (t * slack));
    sigma.push_back(slack);
  }
  for (int i = 0; i < P.n; ++i) {
    if (std::isnan(P.lower(i))) continue;
    double slack = x(i) - P.lower(i);
    if (slack <= active_tol) {
      VectorXd e = VectorXd::Zero(P.n);
      e(i) = -1.0;
      cols.push_back(std::move(e));
      lam_b.push_back(1.0 / (t * slack));
      sigma.push_back(slack);
    }
  }

  // A dual correction for an S on the cone boundary may only be supported on
  // the near-null eigenspace of S; build the param-space basis of that
  // absorbable subspace per block.
  auto map_of = [](const MatrixXcd& W, const Compiled::PsdBlock& blk, VectorXd& out) {
    int M = blk.dim;
    out.setZero();
    for (int m = 0; m < M; ++m) out(blk.params[m]) = W(m, m).real();
    int off = M;
    for (int p = 0; p < M; ++p)
      for (int q2 = p + 1; q2 < M; ++q2) {
        out(blk.params[off]) = 2.0 * W(p, q2).real();
        out(blk.params[off + 1]) = 2.0 * W(p, q2).imag();
        off += 2;
      }
  };

  std::vector<MatrixXd> absorbable;  // per block: n x d basis (orthonormal)
  std::vector<Eigen::SelfAdjointEigenSolver<MatrixXcd>> decomps;
  for (const auto& blk : P.psd_blocks) {
    MatrixXcd S = P.psd_matrix(blk, x);
    decomps.emplace_back(S);
    const auto& eig = decomps.back();
    double top = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
    std::vector<int> null_dirs;
    for (int i = 0; i < blk.dim; ++i)
      if (eig.eigenvalues()(i) <= 1e-6 * top) null_dirs.push_back(i);
    std::vector<VectorXd> basis;
    VectorXd tmp(P.n);
    for (std::size_t a = 0; a < null_dirs.size(); ++a) {
      VectorXcd ua = eig.eigenvectors().col(null_dirs[a]);
      for (std::size_t b = a; b < null_dirs.size(); ++b) {
        VectorXcd ub = eig.eigenvectors().col(null_dirs[b]);
        if (a == b) {
          map_of(ua * ua.adjoint(), blk, tmp);
          basis.push_back(tmp);
        } else {
          map_of(ua * ub.adjoint() + ub * ua.adjoint(), blk, tmp);
          basis.push_back(tmp);
          MatrixXcd im_dir =
              std::complex<double>(0, 1) * (ua * ub.adjoint() - ub * ua.adjoint());
          map_of(im_dir, blk, tmp);
          basis.push_back(tmp);
        }
      }
    }
    MatrixXd B(P.n, static_cast<int>(basis.size()));
    for (std::size_t c = 0; c < basis.size(); ++c) B.col(static_cast<int>(c)) = basis[c];
    if (B.cols() > 0) {
      Eigen::HouseholderQR<MatrixXd> qr(B);
      MatrixXd Q = qr.householderQ() * MatrixXd::Identity(P.n, B.cols());
      absorbable.push_back(std::move(Q));
    } else {
      absorbable.push_back(MatrixXd::Zero(P.n, 0));
    }
  }

  auto strip_absorbable = [&](VectorXd& v) {
    for (const auto& Q : absorbable)
      if (Q.cols() > 0) v -= Q * (Q.transpose() * v);
  };

  // Total residual for a candidate multiplier assignment: PSD coordinates of
  // the leftover split into the absorbable dual correction and the penalized
  // remainder; dual feasibility and complementarity join the norm.
  auto total_residual = [&](VectorXd r_cand, double comp2) {
    double extra2 = comp2;
    for (std::size_t bi = 0; bi < P.psd_blocks.size(); ++bi) {
      const auto& blk = P.psd_blocks[bi];
      int M = blk.dim;
      VectorXd rp = VectorXd::Zero(P.n);
      for (int a = 0; a < M * M; ++a) {
        rp(blk.params[a]) = r_cand(blk.params[a]);
        r_cand(blk.params[a]) = 0.0;
      }
      VectorXd rp_absorb = VectorXd::Zero(P.n);
      if (absorbable[bi].cols() > 0)
        rp_absorb = absorbable[bi] * (absorbable[bi].transpose() * rp);
      VectorXd rp_left = rp - rp_absorb;
      for (int a = 0; a < M * M; ++a) r_cand(blk.params[a]) = rp_left(blk.params[a]);

      MatrixXcd lambda_mat = MatrixXcd::Zero(M, M);
      for (int m = 0; m < M; ++m) lambda_mat(m, m) = -rp_absorb(blk.params[m]);
      int off = M;
      for (int p = 0; p < M; ++p)
        for (int q2 = p + 1; q2 < M; ++q2) {
          lambda_mat(p, q2) = std::complex<double>(-rp_absorb(blk.params[off]) / 2.0,
                                                   -rp_absorb(blk.params[off + 1]) / 2.0);
          lambda_mat(q2, p) = std::conj(lambda_mat(p, q2));
          off += 2;
        }
      // barrier dual on the non-null eigenspace (boundary-safe pinv)
      const auto& dec = decomps[bi];
      MatrixXcd S = P.psd_matrix(blk, x);
      double top = std::max(dec.eigenvalues().maxCoeff(), 1e-12);
      for (int i = 0; i < blk.dim; ++i) {
        double ev_i = dec.eigenvalues()(i);
        if (ev_i > 1e-6 * top)
          lambda_mat += (1.0 / (t * ev_i)) * dec.eigenvectors().col(i) *
                        dec.eigenvectors().col(i).adjoint();
      }
      Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(lambda_mat, Eigen::EigenvaluesOnly);
      double dual_viol = std::max(0.0, -eig.eigenvalues().minCoeff());
      double comp = std::abs((lambda_mat * S).trace()) / (1.0 + std::abs(S.trace()));
      extra2 += dual_viol * dual_viol + comp * comp;
    }
    return std::sqrt(r_cand.squaredNorm() + extra2);
  };

  // candidate 1: plain barrier duals
  double comp2_b = 0.0;
  for (std::size_t c = 0; c < cols.size(); ++c)
    comp2_b += (lam_b[c] * sigma[c]) * (lam_b[c] * sigma[c]);
  double best = total_residual(r, comp2_b);

  // candidate 2: least-squares-polished multipliers over the active columns
  // (skipped when the fit is degenerate enough to inject noise)
  if (!cols.empty()) {
    VectorXd r_fit = r;
    strip_absorbable(r_fit);
    std::vector<int> keep(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) keep[c] = static_cast<int>(c);
    std::vector<double> lam_final(cols.size(), 0.0);
    std::vector<VectorXd> stripped(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      VectorXd col = cols[c];
      strip_absorbable(col);
      stripped[c] = col;
    }
    for (int pass = 0; pass < 4 && !keep.empty(); ++pass) {
      MatrixXd A(P.n, static_cast<int>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c)
        A.col(static_cast<int>(c)) = stripped[keep[c]];
      VectorXd delta = A.colPivHouseholderQr().solve(r_fit);
      std::vector<int> next;
      for (std::size_t c = 0; c < cols.size(); ++c) lam_final[c] = lam_b[c];
      for (std::size_t c = 0; c < keep.size(); ++c)
        lam_final[keep[c]] = lam_b[keep[c]] + delta(static_cast<int>(c));
      for (std::size_t c = 0; c < keep.size(); ++c)
        if (lam_final[keep[c]] >= 0.0) next.push_back(keep[c]);
      if (next.size() == keep.size()) break;
      keep = std::move(next);
    }
    VectorXd r_pol = r;
    double comp2_p = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double lam = std::max(lam_final[c], 0.0);
      r_pol -= (lam - lam_b[c]) * cols[c];
      comp2_p += (lam * sigma[c]) * (lam * sigma[c]);
    }
    best = std::min(best, total_residual(std::move(r_pol), comp2_p));
  }
  return best;
}

// One SQP-style equality step on the active manifold: linearized KKT system
// over the active scalar constraints and the frozen PSD faces. Near-quadratic
// convergence where the damped barrier iteration stalls on conditioning.
VectorXd kkt_polish_point(const Compiled& P, const Evaluator& ev, const VectorXd& x0) {
  VectorXd x = x0;
  for (int round = 0; round < 3; ++round) {
    // objective gradient and Hessian (no barrier)
    VectorXd g0 = P.c;
    MatrixXd H = MatrixXd::Zero(P.n, P.n);
    for (const auto& lt : P.log_terms) {
      double D = lt.d_const + (lt.d_var >= 0 ? lt.d_coeff * x(lt.d_var) : 0.0);
      if (D <= 1e-300) continue;
      double U = lt.u.dot(x) + lt.u_const;
      double r = U / D, w = 1.0 + r;
      double c2 = lt.coeff / std::log(2.0);
      g0 += (c2 / w) * lt.u;
      VectorXd q = lt.u;
      if (lt.d_var >= 0) {
        g0(lt.d_var) += c2 * (std::log(w) - r / w) * lt.d_coeff;
        q(lt.d_var) -= r * lt.d_coeff;
      }
      H.noalias() -= (c2 / (D * w * w)) * q * q.transpose();
    }

    // active scalar constraints with gradients and current values
    std::vector<VectorXd> acols;
    std::vector<double> avals;
    const double act_tol = 3e-3;
    for (const auto& row : P.rows) {
      double val = row.a.dot(x) - row.b;
      if (-val <= act_tol) {
        acols.push_back(row.a);
        avals.push_back(val);
      }
    }
    for (const auto& q : P.quads) {
      double val = ev.quad_value(q, x);
      if (-val > act_tol) continue;
      int sz = static_cast<int>(q.support.size());
      VectorXd xs(sz);
      for (int i = 0; i < sz; ++i) xs(i) = x(q.support[i]);
      VectorXd gq_sup = 2.0 * (q.Q * xs);
      VectorXd gq = q.a;
      for (int i = 0; i < sz; ++i) gq(q.support[i]) += gq_sup(i);
      acols.push_back(std::move(gq));
      avals.push_back(val);
    }
    for (int i = 0; i < P.n; ++i) {
      if (std::isnan(P.lower(i))) continue;
      double val = P.lower(i) - x(i);
      if (-val <= act_tol) {
        VectorXd e = VectorXd::Zero(P.n);
        e(i) = -1.0;
        acols.push_back(std::move(e));
        avals.push_back(val);
      }
    }
    // PSD face normals (zero current residual: the point sits on its face)
    for (const auto& blk : P.psd_blocks) {
      MatrixXcd S = P.psd_matrix(blk, x);
      Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(S);
      double top = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
      std::vector<int> null_dirs;
      for (int i = 0; i < blk.dim; ++i)
        if (eig.eigenvalues()(i) <= 1e-6 * top) null_dirs.push_back(i);
      VectorXd tmp(P.n);
      auto push_face = [&](const MatrixXcd& W, double val) {
        tmp.setZero();
        int M = blk.dim;
        for (int mDiag = 0; mDiag < M; ++mDiag) tmp(blk.params[mDiag]) = W(mDiag, mDiag).real();
        int off = M;
        for (int p = 0; p < M; ++p)
          for (int q2 = p + 1; q2 < M; ++q2) {
            tmp(blk.params[off]) = 2.0 * W(p, q2).real();
            tmp(blk.params[off + 1]) = 2.0 * W(p, q2).imag();
            off += 2;
          }
        acols.push_back(tmp);
        avals.push_back(val);
      };
      for (std::size_t a = 0; a < null_dirs.size(); ++a) {
        VectorXcd ua = eig.eigenvectors().col(null_dirs[a]);
        push_face(ua * ua.adjoint(), eig.eigenvalues()(null_dirs[a]));
        for (std::size_t b = a + 1; b < null_dirs.size(); ++b) {
          VectorXcd ub = eig.eigenvectors().col(null_dirs[b]);
          push_face(ua * ub.adjoint() + ub * ua.adjoint(), 0.0);
          push_face(std::complex<double>(0, 1) * (ua * ub.adjoint() - ub * ua.adjoint()), 0.0);
        }
      }
    }

    // prune linearly dependent active rows (degenerate corners)
    std::vector<int> kept;
    std::vector<VectorXd> ortho;
    for (std::size_t c = 0; c < acols.size(); ++c) {
      VectorXd v = acols[c];
      for (const auto& u : ortho) v -= u.dot(v) * u;
      if (v.norm() > 1e-8 * (acols[c].norm() + 1e-300)) {
        ortho.push_back(v / v.norm());
        kept.push_back(static_cast<int>(c));
      }
    }

    int na = static_cast<int>(kept.size());
    int dim = P.n + na;
    MatrixXd kkt = MatrixXd::Zero(dim, dim);
    kkt.topLeftCorner(P.n, P.n) = -H + 1e-9 * MatrixXd::Identity(P.n, P.n);
    kkt.bottomRightCorner(na, na) = -1e-10 * MatrixXd::Identity(na, na);
    for (int c = 0; c < na; ++c) {
      kkt.block(0, P.n + c, P.n, 1) = acols[kept[c]];
      kkt.block(P.n + c, 0, 1, P.n) = acols[kept[c]].transpose();
    }
    VectorXd rhs(dim);
    rhs.head(P.n) = g0;
    for (int c = 0; c < na; ++c) rhs(P.n + c) = -avals[kept[c]];
    VectorXd sol = Eigen::ColPivHouseholderQR<MatrixXd>(kkt).solve(rhs);
    if (!sol.allFinite()) return x;
    VectorXd dx = sol.head(P.n);
    if (dx.norm() > 1e-2 * (1.0 + x.norm())) return x;  // outside the local basin
    x += dx;
    // retract onto the PSD cone (second-order drift off the face)
    for (const auto& blk : P.psd_blocks) {
      MatrixXcd S = P.psd_matrix(blk, x);
      Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(S);
      if (eig.eigenvalues().minCoeff() >= 0.0) continue;
      VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
      MatrixXcd proj = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
      int M = blk.dim;
      for (int mDiag = 0; mDiag < M; ++mDiag) x(blk.params[mDiag]) = proj(mDiag, mDiag).real();
      int off = M;
      for (int p = 0; p < M; ++p)
        for (int q2 = p + 1; q2 < M; ++q2) {
          x(blk.params[off]) = proj(p, q2).real();
          x(blk.params[off + 1]) = proj(p, q2).imag();
          off += 2;
        }
    }
  }
  return x;
}

}  // namespace

ConicSolution solve(const Compiled& P, const SolveOptions& opts) {
  ConicSolution sol;
  if (P.infeasible_constant) {
    sol.status = SolveStatus::Infeasible;
    sol.x = P.x0;
    sol.primal_residual = P.infeasible_violation;
    return sol;
  }
  VectorXd x = P.x0;
  int iters = 0;
  const double m = std::max(1.0, P.barrier_count());
  const double mu = 30.0;
  Evaluator ev2(P, false);

  // Phase I whenever the hints are not strictly interior for the soft rows.
  {
    double worst = -kInf;
    Evaluator ev1(P, true);
    VectorXd y(P.n + 1);
    y.head(P.n) = x;
    y(P.n) = 0.0;
    for (const auto& r : P.rows) worst = std::max(worst, r.a.dot(x) - r.b);
    for (const auto& q : P.quads)
      if (!q.hard) worst = std::max(worst, ev1.quad_value(q, x));
    if (worst > -1e-9) {
      y(P.n) = std::max(worst, 0.0) + 1.0;
      double t = 1.0;
      while (iters < opts.max_iter && y(P.n) >= -1e-4 && m / t > 1e-12) {
        center(ev1, y, t, iters, opts.max_iter, false);
        t *= mu;
      }
      if (y(P.n) >= -1e-12) {
        sol.x = y.head(P.n);
        sol.objective = P.objective(sol.x);
        sol.primal_residual = std::max(y(P.n), 0.0);
        sol.iterations = iters;
        sol.status =
            iters >= opts.max_iter ? SolveStatus::MaxIter : SolveStatus::Infeasible;
        return sol;
      }
      x = y.head(P.n);
    }
  }

  if (!std::isfinite(ev2.psi(x, 1.0))) {
    // Interior for the constraints but outside a log-term domain; callers
    // construct programs where this cannot happen, so fail conservatively.
    sol.x = x;
    sol.objective = -kInf;
    sol.primal_residual = P.primal_violation(x);
    sol.iterations = iters;
    sol.status = SolveStatus::MaxIter;
    return sol;
  }

  // Phase II barrier ladder up to the gap target, then a certification sweep:
  // burst-center at growing t, recover duals, keep the best-certified point.
  // The sweep adapts to where each instance's conditioning/depth tradeoff
  // bottoms out.
  double t = 1.0;
  bool optimal = false;
  {
    double gap_abs = opts.eps * std::max(1.0, std::abs(ev2.f(x)));
    double t_gap = m / gap_abs;
    while (t < 0.999 * t_gap && iters < opts.max_iter) {
      center(ev2, x, t, iters, opts.max_iter, false);
      t = std::min(t * mu, t_gap);
    }
    VectorXd best_x = x;
    double best_kkt = kInf;
    while (iters < opts.max_iter && t <= 4096.0 * t_gap) {
      CenterResult st{};
      for (int burst = 0; burst < 5 && iters < opts.max_iter; ++burst) {
        st = center(ev2, x, t, iters, std::min(opts.max_iter, iters + 8), true);
        double kkt = std::min(st.stationarity, kkt_residual(P, ev2, x, t));
        if (kkt < best_kkt) {
          best_kkt = kkt;
          best_x = x;
        }
        if (best_kkt <= 0.5 * opts.eps || st.centered) break;
      }
      if (best_kkt <= 0.5 * opts.eps) break;
      t *= 4.0;
    }
    x = best_x;
    if (best_kkt > 0.5 * opts.eps) {
      // active-manifold polish where the barrier iteration bottoms out
      VectorXd xp = kkt_polish_point(P, ev2, x);
      if (P.primal_violation(xp) <= 1e-10 && std::isfinite(P.objective(xp))) {
        double kkt_p = kkt_residual(P, ev2, xp, t);
        if (kkt_p < best_kkt) {
          x = xp;
          best_kkt = kkt_p;
        }
      }
    }
    sol.stationarity_residual = best_kkt;
    optimal = best_kkt <= opts.eps;
  }

  sol.x = x;
  sol.objective = ev2.f(x);
  sol.primal_residual = std::max(0.0, P.primal_violation(x));
  sol.iterations = iters;
  sol.status = optimal ? SolveStatus::Optimal : SolveStatus::MaxIter;
  return sol;
}

ConicSolution solve(const ConicProgram& prog, const SolveOptions& opts) {
  return solve(prog.compile(), opts);
}

}  // namespace wpic::conic
