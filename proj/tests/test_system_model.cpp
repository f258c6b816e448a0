#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "wpic/channel.hpp"
#include "wpic/rng.hpp"
#include "wpic/scheme.hpp"
#include "wpic/system_metrics.hpp"

using namespace wpic;

namespace {

ScenarioConfig small_cfg(int K, int L, int M, int n_per_irs, std::uint64_t seed) {
  ScenarioConfig cfg = ScenarioConfig::desk_defaults();
  cfg.K = K;
  cfg.L = L;
  cfg.M = M;
  cfg.N_per_irs = n_per_irs;
  cfg.P.assign(K, cfg.P[0]);
  cfg.sigma2.assign(K, cfg.sigma2[0]);
  cfg.seed = seed;
  return cfg;
}

MatrixXcd random_psd(int M, double trace, Rng& rng) {
  MatrixXcd A(M, M);
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < M; ++c) A(r, c) = rng.complex_gaussian();
  MatrixXcd S = A * A.adjoint();
  return S * (trace / std::real(S.trace()));
}

// Random in-mask allocation; powers are small but arbitrary (the metric
// formulas do not require energy causality).
Allocation random_allocation(const SchemeSpec& scheme, const ChannelSet& cs,
                             const ScenarioConfig& cfg, Rng& rng) {
  Allocation a(scheme, cfg.M, cs.N);
  const int J = scheme.phases();
  double left = cfg.T;
  for (int j = 0; j < J; ++j) {
    double d = (j + 1 == J) ? left : rng.uniform() * left;
    a.delta[j] = d;
    left -= d;
  }
  for (int i = 0; i < scheme.K; ++i)
    for (int j = 0; j < J; ++j)
      if (scheme.hap_energy(i, j)) a.S[i][j] = random_psd(cfg.M, cfg.P[i] * rng.uniform(), rng);
  for (int k = 0; k < scheme.K; ++k)
    for (int j = 0; j < J; ++j)
      if (scheme.tx(k, j)) a.p[k][j] = 1e-6 * rng.uniform();
  for (int i = 0; i < scheme.K; ++i)
    for (int j = 0; j < J; ++j)
      if (scheme.rx(i, j)) {
        VectorXcd w(cfg.M);
        for (int m = 0; m < cfg.M; ++m) w(m) = rng.complex_gaussian();
        a.w[i][j] = w / w.norm();
      }
  for (int j = 0; j < J; ++j) {
    for (int n = 0; n < cs.N; ++n) a.v[j](n) = rng.uniform() * rng.random_phase();
    a.v[j](cs.N) = 1.0;
  }
  return a;
}

}  // namespace

TEST_CASE("scheme masks") {
  SchemeSpec asy(SchemeKind::Asy, 3);
  CHECK(asy.phases() == 4);
  // WD k transmits after its harvest deadline, HAP i radiates through phase i
  CHECK(asy.harvests(1, 0));
  CHECK(asy.harvests(1, 1));
  CHECK(!asy.harvests(1, 2));
  CHECK(asy.tx(1, 2));
  CHECK(!asy.tx(1, 1));
  CHECK(asy.hap_energy(2, 2));
  CHECK(!asy.hap_energy(0, 1));
  CHECK(asy.rx(0, 1));
  CHECK(!asy.rx(2, 2));
  CHECK(asy.rx(2, 3));

  SchemeSpec tdma(SchemeKind::Tdma, 3);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 4; ++j) {
      CHECK(tdma.tx(k, j) == (j == k + 1));
      CHECK(tdma.rx(k, j) == (j == k + 1));
      // TDMA restricts Asy; it never transmits outside the Asy mask
      if (tdma.tx(k, j)) CHECK(asy.tx(k, j));
      if (tdma.rx(k, j)) CHECK(asy.rx(k, j));
      CHECK(tdma.harvests(k, j) == asy.harvests(k, j));
      CHECK(tdma.hap_energy(k, j) == asy.hap_energy(k, j));
    }

  SchemeSpec syn(SchemeKind::Syn, 3);
  CHECK(syn.phases() == 2);
  for (int k = 0; k < 3; ++k) {
    CHECK(syn.harvests(k, 0));
    CHECK(!syn.harvests(k, 1));
    CHECK(syn.tx(k, 1));
    CHECK(syn.hap_energy(k, 0));
    CHECK(syn.rx(k, 1));
  }
}

TEST_CASE("harvested energy") {
  SUBCASE("zero covariances harvest nothing") {
    ScenarioConfig cfg = small_cfg(2, 2, 2, 2, 1);
    ChannelSet cs = assemble_channels(cfg);
    Allocation a(SchemeSpec(SchemeKind::Asy, 2), cfg.M, cs.N);
    a.delta.assign(3, cfg.T / 3);
    CHECK(harvested_energy(0, 0, a, cs, cfg) == 0.0);
    CHECK_THROWS_AS(harvested_energy(0, 1, a, cs, cfg), std::logic_error);
  }
  SUBCASE("scalar collapse: eta*delta*P*|g|^2 with the IRS off") {
    ScenarioConfig cfg = small_cfg(1, 1, 1, 1, 2);
    ChannelSet cs = assemble_channels(cfg);
    Allocation a(SchemeSpec(SchemeKind::Asy, 1), 1, cs.N);
    a.delta = {0.3, 0.7};
    a.S[0][0] = MatrixXcd::Constant(1, 1, cfg.P[0]);
    a.set_irs_off();
    double expected = cfg.eta * 0.3 * cfg.P[0] * std::norm(cs.g[0][0](0));
    CHECK(harvested_energy(0, 0, a, cs, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("matches a dense elementwise re-evaluation") {
    ScenarioConfig cfg = small_cfg(2, 2, 2, 2, 3);
    ChannelSet cs = assemble_channels(cfg);
    Rng rng(17);
    SchemeSpec scheme(SchemeKind::Asy, 2);
    Allocation a = random_allocation(scheme, cs, cfg, rng);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j) {
        if (!scheme.harvests(k, j)) continue;
        // independent triple loop over tr(Psi* v* v^T Psi^T S)
        double acc = 0.0;
        for (int i = 0; i < 2; ++i) {
          if (!scheme.hap_energy(i, j)) continue;
          VectorXcd y = cs.psi[k][i] * a.v[j];
          for (int r = 0; r < cfg.M; ++r)
            for (int c = 0; c < cfg.M; ++c)
              acc += std::real(y(r) * a.S[i][j](r, c) * std::conj(y(c)));
        }
        double expected = cfg.eta * a.delta[j] * acc;
        double got = harvested_energy(k, j, a, cs, cfg);
        CHECK(got == doctest::Approx(expected).epsilon(1e-10));
      }
  }
}

TEST_CASE("sinr") {
  ScenarioConfig cfg = small_cfg(3, 3, 2, 2, 5);
  ChannelSet cs = assemble_channels(cfg);
  SchemeSpec scheme(SchemeKind::Asy, 3);
  Rng rng(23);
  Allocation a = random_allocation(scheme, cs, cfg, rng);

  SUBCASE("zero own power gives zero sinr") {
    Allocation b = a;
    b.p[0][1] = 0.0;
    CHECK(sinr(0, 1, b, cs, cfg) == 0.0);
  }
  SUBCASE("interference-free matched filter hits p*||a||^2/sigma^2") {
    Allocation b = a;
    // phase 1: only WD 0 can transmit, matched filter on its channel
    VectorXcd chan = cs.psi[0][0] * b.v[1];
    b.w[0][1] = chan / chan.norm();
    b.p[0][1] = 2.5e-7;
    double expected = b.p[0][1] * chan.squaredNorm() / cfg.sigma2[0];
    CHECK(sinr(0, 1, b, cs, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("matches an independent quotient evaluation") {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) {
        if (!scheme.rx(i, j)) continue;
        double num = a.p[i][j] * std::norm(a.w[i][j].dot(cs.psi[i][i] * a.v[j]));
        double den = cfg.sigma2[i] * a.w[i][j].squaredNorm();
        for (int k = 0; k < 3; ++k)
          if (k != i && scheme.tx(k, j))
            den += a.p[k][j] * std::norm(a.w[i][j].dot(cs.psi[k][i] * a.v[j]));
        CHECK(sinr(i, j, a, cs, cfg) == doctest::Approx(num / den).epsilon(1e-10));
      }
  }
  SUBCASE("scaling every power and the noise together leaves sinr unchanged") {
    ScenarioConfig scaled = cfg;
    Allocation b = a;
    const double c = 37.5;
    for (auto& row : b.p)
      for (double& val : row) val *= c;
    for (double& s2 : scaled.sigma2) s2 *= c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (scheme.rx(i, j))
          CHECK(sinr(i, j, b, cs, scaled) ==
                doctest::Approx(sinr(i, j, a, cs, cfg)).epsilon(1e-10));
  }
  SUBCASE("unit-modulus rotation of w leaves sinr unchanged") {
    Allocation b = a;
    b.w[1][2] *= std::polar(1.0, 1.234);
    CHECK(sinr(1, 2, b, cs, cfg) == doctest::Approx(sinr(1, 2, a, cs, cfg)).epsilon(1e-10));
  }
}

TEST_CASE("throughput and energy accounting") {
  ScenarioConfig cfg = small_cfg(3, 3, 2, 2, 7);
  ChannelSet cs = assemble_channels(cfg);
  SchemeSpec scheme(SchemeKind::Asy, 3);
  Rng rng(29);
  Allocation a = random_allocation(scheme, cs, cfg, rng);

  SUBCASE("zero powers give zero throughput") {
    Allocation b = a;
    for (auto& row : b.p)
      for (double& val : row) val = 0.0;
    CHECK(sum_throughput(b, cs, cfg) == 0.0);
  }
  SUBCASE("single pair at sinr 1 for one second yields one bit") {
    ScenarioConfig c1 = small_cfg(1, 1, 1, 1, 9);
    ChannelSet cs1 = assemble_channels(c1);
    Allocation b(SchemeSpec(SchemeKind::Asy, 1), 1, cs1.N);
    b.delta = {0.0, 1.0};
    b.w[0][1] = VectorXcd::Constant(1, 1.0);
    b.set_irs_off();
    // pick p so that sinr is exactly 1
    b.p[0][1] = c1.sigma2[0] / std::norm(cs1.g[0][0](0));
    CHECK(sinr(0, 1, b, cs1, c1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum_throughput(b, cs1, c1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("matches the term-by-term sum") {
    double total = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (scheme.rx(i, j) && a.delta[j] > 0.0)
          total += a.delta[j] * std::log2(1.0 + sinr(i, j, a, cs, cfg));
    CHECK(sum_throughput(a, cs, cfg) == doctest::Approx(total).epsilon(1e-12));
  }
  SUBCASE("zero-duration phases contribute exactly zero") {
    Allocation b = a;
    b.delta[1] = 0.0;
    double manual = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (scheme.rx(i, j) && j != 1 && b.delta[j] > 0.0)
          manual += b.delta[j] * std::log2(1.0 + sinr(i, j, b, cs, cfg));
    CHECK(sum_throughput(b, cs, cfg) == doctest::Approx(manual).epsilon(1e-12));
    // harvesting in that phase is gone too
    CHECK(harvested_energy(1, 1, b, cs, cfg) == 0.0);
  }
  SUBCASE("total energy: single term and accumulation oracle") {
    Allocation b(SchemeSpec(SchemeKind::Asy, 1), 2, 4);
    b.delta = {0.4, 0.6};
    b.S[0][0] = MatrixXcd::Identity(2, 2);  // trace 2 W
    CHECK(total_energy(b) == doctest::Approx(0.8).epsilon(1e-12));

    double acc = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (scheme.hap_energy(i, j)) acc += a.delta[j] * std::real(a.S[i][j].trace());
    CHECK(total_energy(a) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("feasibility report") {
  ScenarioConfig cfg = small_cfg(2, 2, 2, 2, 11);
  ChannelSet cs = assemble_channels(cfg);
  SchemeSpec scheme(SchemeKind::Asy, 2);

  SUBCASE("the zero allocation passes with zero residuals") {
    Allocation a(scheme, cfg.M, cs.N);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        if (scheme.rx(i, j)) {
          a.w[i][j].setZero();
          a.w[i][j](0) = 1.0;
        }
    FeasibilityReport rep = check_feasibility(a, cs, cfg);
    CHECK(rep.pass);
    CHECK(rep.worst() == doctest::Approx(0.0));
  }
  SUBCASE("time overrun is reported with its exact residual") {
    Allocation a(scheme, cfg.M, cs.N);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        if (scheme.rx(i, j)) {
          a.w[i][j].setZero();
          a.w[i][j](0) = 1.0;
        }
    a.delta = {cfg.T / 3, cfg.T / 3, cfg.T / 3 + 0.01};
    FeasibilityReport rep = check_feasibility(a, cs, cfg, 1e-6);
    CHECK(!rep.pass);
    CHECK(rep.total_time == doctest::Approx(0.01 / cfg.T).epsilon(1e-9));
  }
  SUBCASE("non-psd covariance and modulus violations are caught") {
    Allocation a(scheme, cfg.M, cs.N);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        if (scheme.rx(i, j)) {
          a.w[i][j].setZero();
          a.w[i][j](0) = 1.0;
        }
    a.S[0][0] << 1.0, 0.0, 0.0, -0.5;
    a.v[1](0) = std::polar(1.25, 0.3);
    FeasibilityReport rep = check_feasibility(a, cs, cfg);
    CHECK(rep.psd == doctest::Approx(0.5 / cfg.P[0]).epsilon(1e-9));
    CHECK(rep.irs_modulus == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(!rep.pass);
  }
}

TEST_CASE("scheme nesting: embedded TDMA and Syn points evaluate identically in Asy") {
  ScenarioConfig cfg = small_cfg(3, 3, 2, 2, 13);
  ChannelSet cs = assemble_channels(cfg);
  Rng rng(31);

  SUBCASE("tdma") {
    SchemeSpec tdma(SchemeKind::Tdma, 3);
    Allocation a = random_allocation(tdma, cs, cfg, rng);
    // structural embedding: same layout, masked entries already zero
    Allocation b(SchemeSpec(SchemeKind::Asy, 3), cfg.M, cs.N);
    b.delta = a.delta;
    b.v = a.v;
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 4; ++j) {
        b.S[k][j] = a.S[k][j];
        b.p[k][j] = a.p[k][j];
        if (b.scheme.rx(k, j)) {
          if (a.scheme.rx(k, j)) {
            b.w[k][j] = a.w[k][j];
          } else {
            b.w[k][j].setZero();
            b.w[k][j](0) = 1.0;  // decodes a silent WD: zero rate either way
          }
        }
      }
    CHECK(sum_throughput(b, cs, cfg) ==
          doctest::Approx(sum_throughput(a, cs, cfg)).epsilon(1e-12));
    CHECK(total_energy(b) == doctest::Approx(total_energy(a)).epsilon(1e-12));
  }
  SUBCASE("syn") {
    SchemeSpec syn(SchemeKind::Syn, 3);
    Allocation a = random_allocation(syn, cs, cfg, rng);
    Allocation b(SchemeSpec(SchemeKind::Asy, 3), cfg.M, cs.N);
    b.delta.assign(4, 0.0);
    b.delta[0] = a.delta[0];
    b.delta[3] = a.delta[1];
    for (int i = 0; i < 3; ++i) b.S[i][0] = a.S[i][0];
    for (int k = 0; k < 3; ++k) b.p[k][3] = a.p[k][1];
    b.v[0] = a.v[0];
    b.v[3] = a.v[1];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        if (b.scheme.rx(i, j)) {
          if (j == 3) {
            b.w[i][j] = a.w[i][1];
          } else {
            b.w[i][j].setZero();
            b.w[i][j](0) = 1.0;
          }
        }
    CHECK(sum_throughput(b, cs, cfg) ==
          doctest::Approx(sum_throughput(a, cs, cfg)).epsilon(1e-12));
    CHECK(total_energy(b) == doctest::Approx(total_energy(a)).epsilon(1e-12));
    // the embedding stays feasible whenever the original was
    FeasibilityReport orig = check_feasibility(a, cs, cfg, 1e-6);
    FeasibilityReport emb = check_feasibility(b, cs, cfg, 1e-6);
    CHECK(emb.total_time == doctest::Approx(orig.total_time).epsilon(1e-9));
  }
}
