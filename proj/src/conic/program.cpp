#include "wpic/conic/program.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace wpic::conic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

ScalarVar ConicProgram::add_scalar(std::string name, bool nonneg, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("scalar scale must be > 0");
  ScalarInfo info;
  info.name = std::move(name);
  info.nonneg = nonneg;
  info.scale = scale;
  scalars_.push_back(std::move(info));
  return {static_cast<int>(scalars_.size()) - 1};
}

void ConicProgram::pin_scalar(ScalarVar s, double value) {
  scalars_.at(s.id).pinned = true;
  scalars_.at(s.id).pin_value = value;
}

void ConicProgram::set_scalar_floor(ScalarVar s, double floor) {
  scalars_.at(s.id).floor = floor;
  scalars_.at(s.id).nonneg = true;
}

void ConicProgram::hint_scalar(ScalarVar s, double value) { scalars_.at(s.id).hint = value; }

VectorVar ConicProgram::add_vector(std::string name, int dim) {
  if (dim < 1) throw std::invalid_argument("vector dim must be >= 1");
  VectorInfo info;
  info.name = std::move(name);
  info.dim = dim;
  info.pinned.assign(dim, false);
  info.pin_values = VectorXcd::Zero(dim);
  info.bound.assign(dim, kInf);
  info.hint = VectorXcd::Zero(dim);
  vectors_.push_back(std::move(info));
  return {static_cast<int>(vectors_.size()) - 1};
}

void ConicProgram::set_modulus_bound(VectorVar v, int entry, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("modulus bound must be > 0");
  vectors_.at(v.id).bound.at(entry) = bound;
}

void ConicProgram::pin_entry(VectorVar v, int entry, std::complex<double> value) {
  auto& info = vectors_.at(v.id);
  info.pinned.at(entry) = true;
  info.pin_values(entry) = value;
}

void ConicProgram::hint_vector(VectorVar v, const VectorXcd& value) {
  auto& info = vectors_.at(v.id);
  if (value.size() != info.dim) throw std::invalid_argument("vector hint size mismatch");
  info.hint = value;
}

PsdVar ConicProgram::add_psd(std::string name, int dim, double scale) {
  if (dim < 1) throw std::invalid_argument("psd dim must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("psd scale must be > 0");
  PsdInfo info;
  info.name = std::move(name);
  info.dim = dim;
  info.scale = scale;
  info.hint = MatrixXcd::Identity(dim, dim) * scale;
  psds_.push_back(std::move(info));
  return {static_cast<int>(psds_.size()) - 1};
}

void ConicProgram::hint_psd(PsdVar s, const MatrixXcd& value) {
  auto& info = psds_.at(s.id);
  if (value.rows() != info.dim || value.cols() != info.dim)
    throw std::invalid_argument("psd hint size mismatch");
  info.hint = value;
}

void ConicProgram::add_le(AffineExpr expr, double bound) {
  rows_.emplace_back(std::move(expr), bound);
}

void ConicProgram::add_quad_le(VectorVar v, MatrixXcd Q, AffineExpr expr) {
  quad_rows_.push_back({v.id, std::move(Q), std::move(expr)});
}

void ConicProgram::set_objective(AffineExpr expr) { objective_ = std::move(expr); }

void ConicProgram::add_log_term(double coeff, ScalarVar delta, AffineExpr x_expr, double s) {
  log_specs_.push_back({coeff, delta.id, 0.0, std::move(x_expr), s});
}

void ConicProgram::add_log_term(double coeff, double delta_const, AffineExpr x_expr, double s) {
  log_specs_.push_back({coeff, -1, delta_const, std::move(x_expr), s});
}

ConicProgram::Layout ConicProgram::layout() const {
  Layout lay;
  int idx = 0;
  lay.scalar_index.assign(scalars_.size(), -1);
  for (std::size_t i = 0; i < scalars_.size(); ++i)
    if (!scalars_[i].pinned) lay.scalar_index[i] = idx++;
  lay.vector_index.resize(vectors_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    lay.vector_index[i].assign(vectors_[i].dim, -1);
    for (int e = 0; e < vectors_[i].dim; ++e) {
      if (vectors_[i].pinned[e]) continue;
      lay.vector_index[i][e] = idx;
      idx += 2;
    }
  }
  lay.psd_index.assign(psds_.size(), -1);
  for (std::size_t i = 0; i < psds_.size(); ++i) {
    lay.psd_index[i] = idx;
    idx += psds_[i].dim * psds_[i].dim;
  }
  lay.n = idx;
  return lay;
}

VectorXd ConicProgram::compile_expr(const Layout& lay, const AffineExpr& expr,
                                    double* constant) const {
  VectorXd a = VectorXd::Zero(lay.n);
  double c = expr.constant;
  for (const auto& t : expr.scalar_terms) {
    const auto& info = scalars_.at(t.var);
    if (info.pinned)
      c += t.coeff * info.pin_value;
    else
      a(lay.scalar_index[t.var]) += t.coeff * info.scale;
  }
  for (const auto& t : expr.vector_terms) {
    const auto& info = vectors_.at(t.var);
    if (t.a.size() != info.dim) throw std::invalid_argument("vector term size mismatch");
    for (int e = 0; e < info.dim; ++e) {
      if (info.pinned[e]) {
        c += std::real(std::conj(t.a(e)) * info.pin_values(e));
      } else {
        int at = lay.vector_index[t.var][e];
        a(at) += t.a(e).real();
        a(at + 1) += t.a(e).imag();
      }
    }
  }
  for (const auto& t : expr.psd_terms) {
    const auto& info = psds_.at(t.var);
    if (t.A.rows() != info.dim || t.A.cols() != info.dim)
      throw std::invalid_argument("psd term size mismatch");
    int base = lay.psd_index[t.var];
    // diag params first, then (re, im) per off-diagonal pair p < q
    for (int m = 0; m < info.dim; ++m) a(base + m) += t.A(m, m).real() * info.scale;
    int off = base + info.dim;
    for (int p = 0; p < info.dim; ++p)
      for (int q = p + 1; q < info.dim; ++q) {
        a(off) += 2.0 * t.A(p, q).real() * info.scale;
        a(off + 1) += 2.0 * t.A(p, q).imag() * info.scale;
        off += 2;
      }
  }
  if (constant) *constant = c;
  return a;
}

void ConicProgram::validate() const {
  for (const auto& q : quad_rows_) {
    const auto& info = vectors_.at(q.var);
    if (q.Q.rows() != info.dim || q.Q.cols() != info.dim)
      throw std::invalid_argument("quad constraint dimension mismatch");
    double nrm = q.Q.cwiseAbs().maxCoeff();
    if ((q.Q - q.Q.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, nrm))
      throw std::invalid_argument("quad constraint matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(q.Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, nrm))
      throw std::invalid_argument("quad constraint matrix not PSD");
  }
  for (const auto& l : log_specs_) {
    if (l.coeff < 0.0) throw std::invalid_argument("log term coefficient must be >= 0");
    if (!(l.s > 0.0)) throw std::invalid_argument("log term offset must be > 0");
    if (l.delta_var >= 0 && !scalars_.at(l.delta_var).pinned &&
        !scalars_.at(l.delta_var).nonneg)
      throw std::invalid_argument("perspective variable must be nonnegative");
    if (l.delta_var < 0 && l.delta_const < 0.0)
      throw std::invalid_argument("perspective constant must be >= 0");
  }
}

Compiled ConicProgram::compile() const {
  validate();
  Layout lay = layout();
  Compiled out;
  out.n = lay.n;
  out.scale = VectorXd::Ones(lay.n);
  out.x0 = VectorXd::Zero(lay.n);
  out.lower = VectorXd::Constant(lay.n, kNaN);

  for (std::size_t i = 0; i < scalars_.size(); ++i) {
    const auto& info = scalars_[i];
    if (info.pinned) continue;
    int at = lay.scalar_index[i];
    out.scale(at) = info.scale;
    double lo = info.nonneg ? info.floor / info.scale : kNaN;
    out.lower(at) = lo;
    double hint = std::isnan(info.hint) ? (info.nonneg ? info.scale : 0.0) : info.hint;
    double x = hint / info.scale;
    if (info.nonneg) x = std::max(x, lo + std::max(1e-8, 1e-3 * std::abs(lo)) + 1e-8);
    out.x0(at) = x;
  }
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const auto& info = vectors_[i];
    for (int e = 0; e < info.dim; ++e) {
      if (info.pinned[e]) continue;
      int at = lay.vector_index[i][e];
      std::complex<double> h = info.hint(e);
      double b = info.bound[e];
      if (std::isfinite(b)) {
        double r = std::abs(h);
        if (r >= b * (1.0 - 1e-9)) h *= (b * (1.0 - 1e-6)) / r;
      }
      out.x0(at) = h.real();
      out.x0(at + 1) = h.imag();
    }
  }
  for (std::size_t i = 0; i < psds_.size(); ++i) {
    const auto& info = psds_[i];
    int base = lay.psd_index[i];
    MatrixXcd H = info.hint / info.scale;  // unit-scale matrix
    H = 0.5 * (H + H.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(H, Eigen::EigenvaluesOnly);
    double lo = eig.eigenvalues().minCoeff();
    double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (lo <= 1e-8 * top) H += (1e-6 * top - lo) * MatrixXcd::Identity(info.dim, info.dim);
    for (int m = 0; m < info.dim; ++m) out.x0(base + m) = H(m, m).real();
    int off = base + info.dim;
    for (int p = 0; p < info.dim; ++p)
      for (int q = p + 1; q < info.dim; ++q) {
        out.x0(off) = H(p, q).real();
        out.x0(off + 1) = H(p, q).imag();
        off += 2;
      }
    Compiled::PsdBlock blk;
    blk.dim = info.dim;
    blk.params.resize(info.dim * info.dim);
    for (int a = 0; a < info.dim * info.dim; ++a) blk.params[a] = base + a;
    out.psd_blocks.push_back(std::move(blk));
  }

  out.c = compile_expr(lay, objective_, &out.c0);
  for (const auto& l : log_specs_) {
    Compiled::LogTerm term;
    term.coeff = l.coeff;
    double xc = 0.0;
    term.u = compile_expr(lay, l.x_expr, &xc) / l.s;
    term.u_const = xc / l.s;
    double log2s = std::log2(l.s);
    if (l.delta_var >= 0) {
      const auto& info = scalars_.at(l.delta_var);
      if (info.pinned) {
        term.d_var = -1;
        term.d_const = info.pin_value;
        out.c0 += l.coeff * info.pin_value * log2s;
      } else {
        term.d_var = lay.scalar_index[l.delta_var];
        term.d_coeff = info.scale;
        out.c(term.d_var) += l.coeff * log2s * info.scale;
      }
    } else {
      term.d_var = -1;
      term.d_const = l.delta_const;
      out.c0 += l.coeff * l.delta_const * log2s;
    }
    out.log_terms.push_back(std::move(term));
  }

  for (const auto& [expr, bound] : rows_) {
    double c = 0.0;
    VectorXd a = compile_expr(lay, expr, &c);
    double b = bound - c;
    double nrm = a.cwiseAbs().maxCoeff();
    if (nrm <= 0.0) {
      if (b < -1e-9 * std::max({1.0, std::abs(c), std::abs(bound)})) {
        out.infeasible_constant = true;
        out.infeasible_violation = std::max(out.infeasible_violation, -b);
      }
      continue;  // no free variables in this row (or satisfied within slop)
    }
    out.rows.push_back({a / nrm, b / nrm});
  }

  auto push_quad = [&](std::vector<int> support, MatrixXd Q, VectorXd a, double c, bool hard) {
    double nrm = std::max({Q.cwiseAbs().maxCoeff(), a.size() ? a.cwiseAbs().maxCoeff() : 0.0,
                           1e-300});
    Compiled::Quad quad;
    quad.support = std::move(support);
    quad.Q = Q / nrm;
    quad.a = a / nrm;
    quad.c = c / nrm;
    quad.hard = hard;
    out.quads.push_back(std::move(quad));
  };

  // modulus bounds as hard quads
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const auto& info = vectors_[i];
    for (int e = 0; e < info.dim; ++e) {
      if (info.pinned[e] || !std::isfinite(info.bound[e])) continue;
      int at = lay.vector_index[i][e];
      push_quad({at, at + 1}, MatrixXd::Identity(2, 2), VectorXd::Zero(lay.n),
                -info.bound[e] * info.bound[e], true);
    }
  }

  // general quadratic constraints v^H Q v + expr <= 0
  for (const auto& qr : quad_rows_) {
    const auto& info = vectors_.at(qr.var);
    double c = 0.0;
    VectorXd a = compile_expr(lay, qr.expr, &c);
    std::vector<int> free_entries;
    for (int e = 0; e < info.dim; ++e)
      if (!info.pinned[e]) free_entries.push_back(e);
    // pinned-pinned block -> constant, pinned-free -> linear
    for (int e1 = 0; e1 < info.dim; ++e1) {
      if (!info.pinned[e1]) continue;
      for (int e2 = 0; e2 < info.dim; ++e2) {
        if (info.pinned[e2]) {
          if (e1 <= e2) {
            std::complex<double> val =
                std::conj(info.pin_values(e1)) * qr.Q(e1, e2) * info.pin_values(e2);
            c += (e1 == e2) ? val.real() : 2.0 * val.real();
          }
        }
      }
    }
    for (int ef : free_entries) {
      std::complex<double> b2(0.0, 0.0);
      for (int e1 = 0; e1 < info.dim; ++e1)
        if (info.pinned[e1]) b2 += std::conj(info.pin_values(e1)) * qr.Q(e1, ef);
      // + 2 Re{ b2 * v_ef } = 2 Re(b2) x_re - 2 Im(b2) x_im ... careful below
      int at = lay.vector_index[qr.var][ef];
      a(at) += 2.0 * b2.real();
      a(at + 1) += -2.0 * b2.imag();
    }
    int F = static_cast<int>(free_entries.size());
    std::vector<int> support(2 * F);
    MatrixXd Q2 = MatrixXd::Zero(2 * F, 2 * F);
    for (int r = 0; r < F; ++r) {
      support[2 * r] = lay.vector_index[qr.var][free_entries[r]];
      support[2 * r + 1] = support[2 * r] + 1;
    }
    for (int r = 0; r < F; ++r)
      for (int s2 = 0; s2 < F; ++s2) {
        std::complex<double> q = qr.Q(free_entries[r], free_entries[s2]);
        Q2(2 * r, 2 * s2) += q.real();
        Q2(2 * r + 1, 2 * s2 + 1) += q.real();
        Q2(2 * r, 2 * s2 + 1) += -q.imag();
        Q2(2 * r + 1, 2 * s2) += q.imag();
      }
    if (F == 0) {
      // fully pinned: constant constraint
      if (c > 1e-9) {
        out.infeasible_constant = true;
        out.infeasible_violation = std::max(out.infeasible_violation, c);
      }
      continue;
    }
    push_quad(std::move(support), std::move(Q2), std::move(a), c, false);
  }

  return out;
}

double Compiled::barrier_count() const {
  double m = static_cast<double>(rows.size() + quads.size());
  for (int i = 0; i < n; ++i)
    if (!std::isnan(lower(i))) m += 1.0;
  for (const auto& blk : psd_blocks) m += blk.dim;
  return m;
}

MatrixXcd Compiled::psd_matrix(const PsdBlock& blk, const VectorXd& x) const {
  MatrixXcd S = MatrixXcd::Zero(blk.dim, blk.dim);
  for (int m = 0; m < blk.dim; ++m) S(m, m) = x(blk.params[m]);
  int off = blk.dim;
  for (int p = 0; p < blk.dim; ++p)
    for (int q = p + 1; q < blk.dim; ++q) {
      std::complex<double> val(x(blk.params[off]), x(blk.params[off + 1]));
      S(p, q) = val;
      S(q, p) = std::conj(val);
      off += 2;
    }
  return S;
}

double Compiled::objective(const VectorXd& x) const {
  double f = c.dot(x) + c0;
  for (const auto& t : log_terms) {
    double D = t.d_const + (t.d_var >= 0 ? t.d_coeff * x(t.d_var) : 0.0);
    if (D <= 1e-300) continue;  // perspective limit: contributes 0
    double U = t.u.dot(x) + t.u_const;
    double w = 1.0 + U / D;
    if (!(w > 0.0)) return -kInf;
    f += t.coeff * D * std::log2(w);
  }
  return f;
}

double Compiled::primal_violation(const VectorXd& x) const {
  double viol = 0.0;
  for (const auto& r : rows) viol = std::max(viol, r.a.dot(x) - r.b);
  for (const auto& q : quads) {
    int s = static_cast<int>(q.support.size());
    VectorXd xs(s);
    for (int i = 0; i < s; ++i) xs(i) = x(q.support[i]);
    viol = std::max(viol, xs.dot(q.Q * xs) + q.a.dot(x) + q.c);
  }
  for (int i = 0; i < n; ++i)
    if (!std::isnan(lower(i))) viol = std::max(viol, lower(i) - x(i));
  for (const auto& blk : psd_blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(psd_matrix(blk, x), Eigen::EigenvaluesOnly);
    viol = std::max(viol, -eig.eigenvalues().minCoeff());
  }
  return viol;
}

double ConicProgram::value_of(const ConicSolution& sol, ScalarVar s) const {
  const auto& info = scalars_.at(s.id);
  if (info.pinned) return info.pin_value;
  return info.scale * sol.x(layout().scalar_index[s.id]);
}

VectorXcd ConicProgram::value_of(const ConicSolution& sol, VectorVar v) const {
  const auto& info = vectors_.at(v.id);
  Layout lay = layout();
  VectorXcd out(info.dim);
  for (int e = 0; e < info.dim; ++e) {
    if (info.pinned[e]) {
      out(e) = info.pin_values(e);
    } else {
      int at = lay.vector_index[v.id][e];
      out(e) = {sol.x(at), sol.x(at + 1)};
    }
  }
  return out;
}

MatrixXcd ConicProgram::value_of(const ConicSolution& sol, PsdVar s) const {
  const auto& info = psds_.at(s.id);
  Layout lay = layout();
  int base = lay.psd_index[s.id];
  MatrixXcd out = MatrixXcd::Zero(info.dim, info.dim);
  for (int m = 0; m < info.dim; ++m) out(m, m) = sol.x(base + m);
  int off = base + info.dim;
  for (int p = 0; p < info.dim; ++p)
    for (int q = p + 1; q < info.dim; ++q) {
      std::complex<double> val(sol.x(off), sol.x(off + 1));
      out(p, q) = val;
      out(q, p) = std::conj(val);
      off += 2;
    }
  return out * info.scale;
}

void ConicProgram::dump(std::ostream& os) const {
  os << "conic program: " << scalars_.size() << " scalars, " << vectors_.size()
     << " complex vectors, " << psds_.size() << " psd matrices\n";
  for (const auto& s : scalars_) {
    os << "  scalar " << s.name;
    if (s.pinned)
      os << " = " << s.pin_value;
    else if (s.nonneg)
      os << " >= " << s.floor;
    os << " (scale " << s.scale << ")\n";
  }
  for (const auto& v : vectors_) {
    os << "  vector " << v.name << " dim " << v.dim << ":";
    for (int e = 0; e < v.dim; ++e) {
      if (v.pinned[e])
        os << " [" << e << "]=" << v.pin_values(e);
      else if (std::isfinite(v.bound[e]))
        os << " |" << e << "|<=" << v.bound[e];
    }
    os << "\n";
  }
  for (const auto& s : psds_)
    os << "  psd " << s.name << " dim " << s.dim << " (scale " << s.scale << ")\n";
  os << "  " << rows_.size() << " affine rows, " << quad_rows_.size() << " quad rows, "
     << log_specs_.size() << " log terms\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& [expr, bound] = rows_[r];
    os << "  row " << r << ": const " << expr.constant << " + " << expr.scalar_terms.size()
       << " scalar terms + " << expr.vector_terms.size() << " vector terms + "
       << expr.psd_terms.size() << " trace terms <= " << bound << "\n";
  }
  for (const auto& l : log_specs_)
    os << "  log term: coeff " << l.coeff << " s " << l.s
       << (l.delta_var >= 0 ? " perspective var" : " fixed perspective ") << l.delta_const
       << "\n";
}

}  // namespace wpic::conic
