#pragma once

#include <complex>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wpic::conic {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct ScalarVar { int id = -1; };
struct VectorVar { int id = -1; };
struct PsdVar { int id = -1; };

// Affine expression over program variables:
//   constant + sum c*x_scalar + sum Re{a^H v} + sum tr(A S).
struct AffineExpr {
  double constant = 0.0;
  struct ScalarTerm { int var; double coeff; };
  struct VecTerm { int var; VectorXcd a; };
  struct PsdTerm { int var; MatrixXcd A; };  // A Hermitian
  std::vector<ScalarTerm> scalar_terms;
  std::vector<VecTerm> vector_terms;
  std::vector<PsdTerm> psd_terms;

  AffineExpr& add(ScalarVar s, double coeff) {
    scalar_terms.push_back({s.id, coeff});
    return *this;
  }
  AffineExpr& add_re_inner(VectorVar v, VectorXcd a) {
    vector_terms.push_back({v.id, std::move(a)});
    return *this;
  }
  AffineExpr& add_trace(PsdVar s, MatrixXcd A) {
    psd_terms.push_back({s.id, std::move(A)});
    return *this;
  }
  AffineExpr& add_const(double c) {
    constant += c;
    return *this;
  }
};

// Realified form consumed by the solver (and by independent test oracles).
// Coordinates are scaled: physical value = scale[i] * x[i]. All coefficient
// data below is expressed directly over the scaled coordinates.
struct Compiled {
  int n = 0;
  VectorXd scale;
  VectorXd x0;  // variable hints, scaled

  // Per-coordinate lower bounds (quiet NaN = unbounded); barrier-enforced.
  VectorXd lower;

  // Objective (maximize): c^T x + c0 + sum of log terms
  //   coeff * D(x) * log2(1 + U(x)/D(x)),
  // D(x) = d_const + d_coeff*x[d_var] (d_var < 0 means constant D).
  VectorXd c;
  double c0 = 0.0;
  struct LogTerm {
    double coeff = 0.0;
    int d_var = -1;
    double d_const = 0.0;
    double d_coeff = 0.0;
    VectorXd u;
    double u_const = 0.0;
  };
  std::vector<LogTerm> log_terms;

  // General affine rows a^T x <= b (normalized); s-relaxable in phase I.
  struct Row {
    VectorXd a;
    double b;
  };
  std::vector<Row> rows;

  // Quadratic constraints x^T Q x + a^T x + c <= 0 with Q PSD supported on
  // `support`. `hard` ones (modulus bounds) are never s-relaxed.
  struct Quad {
    std::vector<int> support;
    MatrixXd Q;  // dense over support
    VectorXd a;  // dense over n
    double c = 0.0;
    bool hard = false;
  };
  std::vector<Quad> quads;

  // Hermitian PSD blocks: dim M, M^2 parameter coordinates ordered as
  // [diag(0..M-1), then for p<q: re(p,q), im(p,q)].
  struct PsdBlock {
    int dim = 0;
    std::vector<int> params;
  };
  std::vector<PsdBlock> psd_blocks;

  // Set when a fully-pinned constraint is violated at build time; solve()
  // reports Infeasible immediately.
  bool infeasible_constant = false;
  double infeasible_violation = 0.0;

  double barrier_count() const;
  MatrixXcd psd_matrix(const PsdBlock& blk, const VectorXd& x) const;

  double objective(const VectorXd& x) const;
  // Max violation over rows/quads/bounds/PSD min-eig at x (>= 0).
  double primal_violation(const VectorXd& x) const;
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct ConicSolution {
  SolveStatus status = SolveStatus::MaxIter;
  double objective = 0.0;
  VectorXd x;  // scaled realified coordinates
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  int iterations = 0;
};

// Convex program over scalars, complex vectors with per-entry modulus bounds
// and pinned entries, and Hermitian PSD matrices, with an affine + concave-log
// objective. Convex by construction; validate() certifies the structure.
class ConicProgram {
 public:
  ScalarVar add_scalar(std::string name, bool nonneg, double scale = 1.0);
  void pin_scalar(ScalarVar s, double value);
  void set_scalar_floor(ScalarVar s, double floor);  // x >= floor (physical)
  void hint_scalar(ScalarVar s, double value);

  VectorVar add_vector(std::string name, int dim);
  void set_modulus_bound(VectorVar v, int entry, double bound);
  void pin_entry(VectorVar v, int entry, std::complex<double> value);
  void hint_vector(VectorVar v, const VectorXcd& value);

  PsdVar add_psd(std::string name, int dim, double scale = 1.0);
  void hint_psd(PsdVar s, const MatrixXcd& value);

  // expr <= bound
  void add_le(AffineExpr expr, double bound);
  // v^H Q v + expr <= 0, Q Hermitian PSD
  void add_quad_le(VectorVar v, MatrixXcd Q, AffineExpr expr);

  void set_objective(AffineExpr expr);
  // + coeff * delta * log2(x_expr/delta + s)
  void add_log_term(double coeff, ScalarVar delta, AffineExpr x_expr, double s);
  void add_log_term(double coeff, double delta_const, AffineExpr x_expr, double s);

  int scalar_count() const { return static_cast<int>(scalars_.size()); }
  int vector_count() const { return static_cast<int>(vectors_.size()); }
  int psd_count() const { return static_cast<int>(psds_.size()); }

  void validate() const;
  Compiled compile() const;
  void dump(std::ostream& os) const;

  double value_of(const ConicSolution& sol, ScalarVar s) const;
  VectorXcd value_of(const ConicSolution& sol, VectorVar v) const;
  MatrixXcd value_of(const ConicSolution& sol, PsdVar s) const;

 private:
  struct ScalarInfo {
    std::string name;
    bool nonneg = false;
    bool pinned = false;
    double pin_value = 0.0;
    double floor = 0.0;
    double scale = 1.0;
    double hint = std::numeric_limits<double>::quiet_NaN();
  };
  struct VectorInfo {
    std::string name;
    int dim = 0;
    std::vector<bool> pinned;
    VectorXcd pin_values;
    std::vector<double> bound;  // per entry; inf = unbounded
    VectorXcd hint;
  };
  struct PsdInfo {
    std::string name;
    int dim = 0;
    double scale = 1.0;
    MatrixXcd hint;
  };
  struct QuadConstraint {
    int var;
    MatrixXcd Q;
    AffineExpr expr;
  };
  struct LogSpec {
    double coeff;
    int delta_var;  // -1 when constant
    double delta_const;
    AffineExpr x_expr;
    double s;
  };

  // Deterministic realified layout: scalars, then vector entries (re, im),
  // then PSD parameters, in declaration order.
  struct Layout {
    int n = 0;
    std::vector<int> scalar_index;               // -1 when pinned
    std::vector<std::vector<int>> vector_index;  // re index per entry, -1 pinned
    std::vector<int> psd_index;                  // first of dim^2 params
  };
  Layout layout() const;
  VectorXd compile_expr(const Layout& lay, const AffineExpr& expr, double* constant) const;

  std::vector<ScalarInfo> scalars_;
  std::vector<VectorInfo> vectors_;
  std::vector<PsdInfo> psds_;
  std::vector<std::pair<AffineExpr, double>> rows_;
  std::vector<QuadConstraint> quad_rows_;
  AffineExpr objective_;
  std::vector<LogSpec> log_specs_;
};

}  // namespace wpic::conic
