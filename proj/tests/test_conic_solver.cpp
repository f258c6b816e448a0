#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pg_oracle.hpp"
#include "program_gen.hpp"
#include "wpic/conic/solver.hpp"
#include "wpic/rng.hpp"

using namespace wpic;
using namespace wpic::conic;

TEST_CASE("psd trace maximization saturates the trace bound") {
  ConicProgram prog;
  PsdVar S = prog.add_psd("S", 2);
  AffineExpr tr;
  tr.add_trace(S, MatrixXcd::Identity(2, 2));
  prog.add_le(tr, 2.0);
  AffineExpr obj;
  obj.add_trace(S, MatrixXcd::Identity(2, 2));
  prog.set_objective(obj);

  ConicSolution sol = solve(prog);
  CHECK(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
  MatrixXcd Sval = prog.value_of(sol, S);
  CHECK(std::real(Sval.trace()) == doctest::Approx(2.0).epsilon(1e-6));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(Sval, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("perspective log objective is monotone in its argument") {
  ConicProgram prog;
  ScalarVar delta = prog.add_scalar("delta", true);
  prog.pin_scalar(delta, 1.0);
  ScalarVar x = prog.add_scalar("x", true);
  AffineExpr cap;
  cap.add(x, 1.0);
  prog.add_le(cap, 3.0);
  AffineExpr x_expr;
  x_expr.add(x, 1.0);
  prog.add_log_term(1.0, delta, x_expr, 1.0);
  prog.set_objective(AffineExpr{});

  ConicSolution sol = solve(prog);
  CHECK(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(prog.value_of(sol, x) == doctest::Approx(3.0).epsilon(1e-5));

  SUBCASE("with a free perspective variable the duration saturates too") {
    ConicProgram prog2;
    ScalarVar d2 = prog2.add_scalar("delta", true);
    prog2.set_scalar_floor(d2, 1e-12);
    ScalarVar x2 = prog2.add_scalar("x", true);
    AffineExpr capd;
    capd.add(d2, 1.0);
    prog2.add_le(capd, 1.0);
    AffineExpr capx;
    capx.add(x2, 1.0);
    prog2.add_le(capx, 3.0);
    AffineExpr xe;
    xe.add(x2, 1.0);
    prog2.add_log_term(1.0, d2, xe, 1.0);
    prog2.set_objective(AffineExpr{});
    ConicSolution sol2 = solve(prog2);
    CHECK(sol2.status == SolveStatus::Optimal);
    CHECK(sol2.objective == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(prog2.value_of(sol2, d2) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("infeasible program is certified") {
  ConicProgram prog;
  ScalarVar x = prog.add_scalar("x", true);
  AffineExpr lo;
  lo.add(x, -1.0);
  prog.add_le(lo, -2.0);  // x >= 2
  AffineExpr hi;
  hi.add(x, 1.0);
  prog.add_le(hi, 1.0);  // x <= 1
  AffineExpr obj;
  obj.add(x, 1.0);
  prog.set_objective(obj);
  ConicSolution sol = solve(prog);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.primal_residual > 0.0);
}

TEST_CASE("solver is deterministic bit for bit") {
  Rng rng(2024);
  ConicProgram prog = program_gen::random_program(rng, true);
  ConicSolution a = solve(prog);
  ConicSolution b = solve(prog);
  CHECK(a.objective == b.objective);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("random programs agree with the projected-gradient oracle") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Rng rng(seed * 977);
    ConicProgram prog = program_gen::random_program(rng, seed % 2 == 0);
    Compiled compiled = prog.compile();
    ConicSolution ipm = solve(compiled);
    INFO("seed ", seed);
    REQUIRE(ipm.status == SolveStatus::Optimal);
    CHECK(ipm.primal_residual <= 1e-8);
    CHECK(ipm.stationarity_residual <= 1e-8);
    pg_oracle::Result ref = pg_oracle::solve(compiled);
    CHECK(std::abs(ipm.objective - ref.objective) <=
          1e-5 * std::max(1.0, std::abs(ipm.objective)));
    ++checked;
  }
  CHECK(checked == 25);
}

TEST_CASE("program dump lists structure") {
  Rng rng(5);
  ConicProgram prog = program_gen::random_program(rng, true);
  std::ostringstream os;
  prog.dump(os);
  CHECK(os.str().find("conic program") != std::string::npos);
  CHECK(os.str().find("scalar") != std::string::npos);
}

TEST_CASE("validation rejects malformed programs") {
  ConicProgram prog;
  VectorVar v = prog.add_vector("v", 2);
  MatrixXcd notpsd(2, 2);
  notpsd << 1.0, 0.0, 0.0, -1.0;
  prog.add_quad_le(v, notpsd, AffineExpr{});
  CHECK_THROWS_AS(prog.validate(), std::invalid_argument);

  ConicProgram prog2;
  ScalarVar d = prog2.add_scalar("d", false);
  prog2.add_log_term(1.0, d, AffineExpr{}, 1.0);  // perspective var not nonneg
  CHECK_THROWS_AS(prog2.validate(), std::invalid_argument);

  ConicProgram prog3;
  prog3.add_log_term(1.0, 1.0, AffineExpr{}, -0.5);  // s <= 0
  CHECK_THROWS_AS(prog3.validate(), std::invalid_argument);
}
