#include "wpic/system_metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace wpic {

double harvested_energy(int k, int j, const Allocation& alloc, const ChannelSet& channels,
                        const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  if (!scheme.harvests(k, j))
    throw std::logic_error("harvested_energy: WD does not harvest in this phase");
  double acc = 0.0;
  for (int i = 0; i < scheme.K; ++i) {
    if (!scheme.hap_energy(i, j)) continue;
    // tr(Psi* v* v^T Psi^T S) = u^H S u with u = (Psi v)*.
    VectorXcd u = (channels.psi[k][i] * alloc.v[j]).conjugate();
    acc += std::real(u.dot(alloc.S[i][j] * u));
  }
  return cfg.eta * alloc.delta[j] * acc;
}

double sinr(int i, int j, const Allocation& alloc, const ChannelSet& channels,
            const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  if (!scheme.rx(i, j)) throw std::logic_error("sinr: HAP does not decode in this phase");
  const VectorXcd& w = alloc.w[i][j];
  double signal = 0.0, interference = 0.0;
  for (int k = 0; k < scheme.K; ++k) {
    if (!scheme.tx(k, j)) continue;
    double gain = std::norm(w.dot(channels.psi[k][i] * alloc.v[j]));
    if (k == i)
      signal = alloc.p[k][j] * gain;
    else
      interference += alloc.p[k][j] * gain;
  }
  return signal / (interference + cfg.sigma2[i] * w.squaredNorm());
}

double sum_throughput(const Allocation& alloc, const ChannelSet& channels,
                      const ScenarioConfig& cfg) {
  const SchemeSpec& scheme = alloc.scheme;
  double total = 0.0;
  for (int i = 0; i < scheme.K; ++i)
    for (int j = 0; j < alloc.phases(); ++j) {
      if (!scheme.rx(i, j) || alloc.delta[j] == 0.0) continue;
      total += alloc.delta[j] * std::log2(1.0 + sinr(i, j, alloc, channels, cfg));
    }
  return total;
}

double total_energy(const Allocation& alloc) {
  const SchemeSpec& scheme = alloc.scheme;
  double total = 0.0;
  for (int i = 0; i < scheme.K; ++i)
    for (int j = 0; j < alloc.phases(); ++j)
      if (scheme.hap_energy(i, j)) total += alloc.delta[j] * std::real(alloc.S[i][j].trace());
  return total;
}

double FeasibilityReport::worst() const {
  double m = energy_causality;
  m = std::max(m, total_time);
  m = std::max(m, trace_power);
  m = std::max(m, receiver_norm);
  m = std::max(m, irs_modulus);
  m = std::max(m, irs_pinned);
  m = std::max(m, psd);
  return m;
}

std::string FeasibilityReport::summary() const {
  std::ostringstream os;
  os << (pass ? "pass" : "FAIL") << " (tol " << tolerance << "): "
     << "energy_causality=" << energy_causality << " total_time=" << total_time
     << " trace_power=" << trace_power << " receiver_norm=" << receiver_norm
     << " irs_modulus=" << irs_modulus << " irs_pinned=" << irs_pinned << " psd=" << psd;
  return os.str();
}

FeasibilityReport check_feasibility(const Allocation& alloc, const ChannelSet& channels,
                                    const ScenarioConfig& cfg, double tol) {
  const SchemeSpec& scheme = alloc.scheme;
  const int K = scheme.K, J = alloc.phases();
  FeasibilityReport rep;
  rep.tolerance = tol;

  // (2b) energy causality, normalized by the harvested energy.
  for (int k = 0; k < K; ++k) {
    double spent = 0.0, harvested = 0.0;
    for (int j = 0; j < J; ++j) {
      if (scheme.tx(k, j)) spent += alloc.delta[j] * alloc.p[k][j];
      if (scheme.harvests(k, j)) harvested += harvested_energy(k, j, alloc, channels, cfg);
    }
    double scale = std::max(harvested, 1e-18);
    rep.energy_causality = std::max(rep.energy_causality, (spent - harvested) / scale);
  }

  // (2c) total time.
  double sum_delta = 0.0;
  for (double d : alloc.delta) {
    sum_delta += d;
    rep.total_time = std::max(rep.total_time, -d / cfg.T);  // delta_j >= 0
  }
  rep.total_time = std::max(rep.total_time, (sum_delta - cfg.T) / cfg.T);

  // (2d) trace power and PSD, normalized by P_i.
  for (int i = 0; i < K; ++i) {
    double pscale = std::max(cfg.P[i], 1e-18);
    for (int j = 0; j < J; ++j) {
      if (!scheme.hap_energy(i, j)) continue;
      rep.trace_power =
          std::max(rep.trace_power, (std::real(alloc.S[i][j].trace()) - cfg.P[i]) / pscale);
      MatrixXcd sym = 0.5 * (alloc.S[i][j] + alloc.S[i][j].adjoint());
      Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sym, Eigen::EigenvaluesOnly);
      rep.psd = std::max(rep.psd, -eig.eigenvalues().minCoeff() / pscale);
    }
  }

  // (2e) unit receive norms.
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < J; ++j)
      if (scheme.rx(i, j))
        rep.receiver_norm = std::max(rep.receiver_norm, std::abs(alloc.w[i][j].squaredNorm() - 1.0));

  // (2f) IRS modulus bounds and pinned last entry.
  for (int j = 0; j < J; ++j) {
    for (int n = 0; n + 1 < alloc.Nv; ++n)
      rep.irs_modulus = std::max(rep.irs_modulus, std::abs(alloc.v[j](n)) - 1.0);
    rep.irs_pinned = std::max(rep.irs_pinned, std::abs(alloc.v[j](alloc.Nv - 1) - 1.0));
  }
  rep.irs_modulus = std::max(rep.irs_modulus, 0.0);

  // Also ensure negative residuals do not mask violations elsewhere.
  rep.energy_causality = std::max(rep.energy_causality, 0.0);
  rep.total_time = std::max(rep.total_time, 0.0);
  rep.trace_power = std::max(rep.trace_power, 0.0);
  rep.psd = std::max(rep.psd, 0.0);

  rep.pass = rep.worst() <= tol;
  return rep;
}

}  // namespace wpic
