#include "wpic/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wpic/conic/builders.hpp"
#include "wpic/conic/solver.hpp"
#include "wpic/rng.hpp"

namespace wpic {

namespace {

constexpr double kAcceptSlack = 1e-9;  // block candidates may not lose more than this

bool usable(const conic::ConicSolution& sol, double eps_solver) {
  if (sol.status == conic::SolveStatus::Infeasible) return false;
  return sol.primal_residual <= 10.0 * eps_solver;
}

}  // namespace

VectorXcd mmse_receiver(int i, int j, const Allocation& alloc, const ChannelSet& channels,
                        const ScenarioConfig& cfg, bool* zero_channel) {
  const SchemeSpec& scheme = alloc.scheme;
  if (!scheme.rx(i, j)) throw std::logic_error("mmse_receiver: HAP does not decode in this phase");
  if (zero_channel) *zero_channel = false;
  const int M = alloc.M;
  VectorXcd a_des = channels.psi[i][i] * alloc.v[j];
  if (a_des.norm() == 0.0) {
    if (zero_channel) *zero_channel = true;
    VectorXcd e1 = VectorXcd::Zero(M);
    e1(0) = 1.0;
    return e1;
  }
  MatrixXcd R = cfg.sigma2[i] * MatrixXcd::Identity(M, M);
  for (int k = 0; k < scheme.K; ++k) {
    if (k == i || !scheme.tx(k, j) || alloc.p[k][j] <= 0.0) continue;
    VectorXcd a = channels.psi[k][i] * alloc.v[j];
    R += alloc.p[k][j] * (a * a.adjoint());
  }
  VectorXcd w = R.llt().solve(a_des);
  return w / w.norm();
}

Allocation initialize(const SchemeSpec& scheme, const ChannelSet& channels,
                      const ScenarioConfig& cfg, const OptimizerConfig& opt_cfg) {
  const int K = scheme.K, J = scheme.phases();
  Allocation alloc(scheme, cfg.M, channels.N);

  for (int j = 0; j < J; ++j) alloc.delta[j] = cfg.T / J;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < J; ++j)
      if (scheme.hap_energy(i, j))
        alloc.S[i][j] = (cfg.P[i] / cfg.M) * MatrixXcd::Identity(cfg.M, cfg.M);

  if (opt_cfg.irs_enabled) {
    Rng rng(hash_combine(hash_combine(cfg.seed, std::uint64_t{0x9e3779b97f4a7c15ull}),
                         static_cast<std::uint64_t>(scheme.kind)));
    for (int j = 0; j < J; ++j) {
      for (int n = 0; n + 1 < alloc.Nv; ++n) alloc.v[j](n) = rng.random_phase();
      alloc.v[j](alloc.Nv - 1) = 1.0;
    }
  }  // otherwise keep the IRS-off vectors from the constructor

  constexpr double kMargin = 1e-3;
  for (int k = 0; k < K; ++k) {
    double harvested = 0.0, tx_time = 0.0;
    for (int j = 0; j < J; ++j) {
      if (scheme.harvests(k, j)) harvested += harvested_energy(k, j, alloc, channels, cfg);
      if (scheme.tx(k, j)) tx_time += alloc.delta[j];
    }
    double power = tx_time > 0.0 ? (1.0 - kMargin) * harvested / tx_time : 0.0;
    for (int j = 0; j < J; ++j)
      if (scheme.tx(k, j)) alloc.p[k][j] = power;
  }

  for (int i = 0; i < K; ++i)
    for (int j = 0; j < J; ++j)
      if (scheme.rx(i, j)) alloc.w[i][j] = mmse_receiver(i, j, alloc, channels, cfg);

  return alloc;
}

Allocation embed_into_asy(const Allocation& alloc, const ChannelSet& channels,
                          const ScenarioConfig& cfg) {
  const int K = alloc.scheme.K;
  SchemeSpec asy(SchemeKind::Asy, K);
  Allocation out(asy, alloc.M, alloc.Nv - 1);

  if (alloc.scheme.kind == SchemeKind::Asy || alloc.scheme.kind == SchemeKind::Tdma) {
    out.delta = alloc.delta;
    for (int j = 0; j < asy.phases(); ++j) out.v[j] = alloc.v[j];
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < asy.phases(); ++j) {
        if (alloc.scheme.hap_energy(k, j)) out.S[k][j] = alloc.S[k][j];
        if (alloc.scheme.tx(k, j)) out.p[k][j] = alloc.p[k][j];
      }
  } else {  // Syn: phase 0 -> 0, phase 1 -> K, middle phases empty
    out.delta.assign(asy.phases(), 0.0);
    out.delta[0] = alloc.delta[0];
    out.delta[K] = alloc.delta[1];
    for (int i = 0; i < K; ++i) out.S[i][0] = alloc.S[i][0];
    for (int k = 0; k < K; ++k) out.p[k][K] = alloc.p[k][1];
    out.v[0] = alloc.v[0];
    out.v[K] = alloc.v[1];
    for (int j = 1; j < K; ++j) {
      out.v[j].setZero();
      out.v[j](out.Nv - 1) = 1.0;
    }
  }
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < asy.phases(); ++j)
      if (asy.rx(i, j)) out.w[i][j] = mmse_receiver(i, j, out, channels, cfg);
  return out;
}

OptimizationResult optimize(const SchemeSpec& scheme, const ChannelSet& channels,
                            const ScenarioConfig& cfg, const OptimizerConfig& opt_cfg) {
  auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  if (channels.K != cfg.K || channels.M != cfg.M)
    throw std::invalid_argument("optimize: channel set does not match config");

  OptimizationResult result;
  Allocation alloc = opt_cfg.warm_start ? *opt_cfg.warm_start
                                        : initialize(scheme, channels, cfg, opt_cfg);
  if (opt_cfg.warm_start && opt_cfg.warm_start->scheme.kind != scheme.kind)
    throw std::invalid_argument("optimize: warm start scheme mismatch");

  conic::SolveOptions solver_opts{opt_cfg.eps_solver, opt_cfg.solver_max_iter};
  double obj = sum_throughput(alloc, channels, cfg);
  result.objective_trace.push_back(obj);

  bool converged = false;
  int outer = 0;
  while (outer < opt_cfg.max_outer) {
    ++outer;
    double obj_start = obj;

    // Block 1: receive vectors (closed form, each maximizes its own SINR).
    {
      Allocation cand = alloc;
      for (int i = 0; i < scheme.K; ++i)
        for (int j = 0; j < cand.phases(); ++j)
          if (scheme.rx(i, j)) cand.w[i][j] = mmse_receiver(i, j, cand, channels, cfg);
      double cand_obj = sum_throughput(cand, channels, cfg);
      if (cand_obj >= obj - kAcceptSlack) {
        alloc = std::move(cand);
        obj = cand_obj;
      }
      result.objective_trace.push_back(obj);
    }

    // Block 2: durations, covariances and powers through the SCA program.
    for (int pass = 0; pass < opt_cfg.sca_inner; ++pass) {
      auto tp = conic::build_time_power_sdp(alloc, channels, cfg);
      auto sol = conic::solve(tp.prog, solver_opts);
      if (usable(sol, opt_cfg.eps_solver)) {
        Allocation cand = alloc;
        tp.apply(sol, cand);
        double cand_obj = sum_throughput(cand, channels, cfg);
        if (cand_obj >= obj - kAcceptSlack) {
          alloc = std::move(cand);
          obj = cand_obj;
        }
      }
    }
    result.objective_trace.push_back(obj);

    // Block 3: reflection vectors, v_1 then the transmission phases.
    if (opt_cfg.irs_enabled) {
      for (int pass = 0; pass < opt_cfg.sca_inner; ++pass) {
        auto v1p = conic::build_v1_qcp(alloc, channels, cfg);
        if (!v1p.trivial) {
          auto sol = conic::solve(v1p.prog, solver_opts);
          // Throughput does not depend on v_1; a feasible update only widens
          // the energy slack for the next block.
          if (usable(sol, opt_cfg.eps_solver)) v1p.apply(sol, alloc);
        }
        auto vh = conic::build_vhat_qcp(alloc, channels, cfg);
        if (!vh.trivial) {
          auto sol = conic::solve(vh.prog, solver_opts);
          if (usable(sol, opt_cfg.eps_solver)) {
            Allocation cand = alloc;
            vh.apply(sol, cand);
            double cand_obj = sum_throughput(cand, channels, cfg);
            if (cand_obj >= obj - kAcceptSlack) {
              alloc = std::move(cand);
              obj = cand_obj;
            }
          }
        }
      }
    }
    result.objective_trace.push_back(obj);

    double rel = (obj - obj_start) / std::max(std::abs(obj_start), 1e-12);
    if (rel < opt_cfg.eps_outer) {
      converged = true;
      break;
    }
  }

  result.allocation = std::move(alloc);
  result.sum_throughput = sum_throughput(result.allocation, channels, cfg);
  result.total_energy = total_energy(result.allocation);
  result.iterations = outer;
  result.converged = converged;
  result.feasibility = check_feasibility(result.allocation, channels, cfg);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

std::map<SchemeKind, OptimizationResult> optimize_all_schemes(const ChannelSet& channels,
                                                              const ScenarioConfig& cfg,
                                                              const OptimizerConfig& opt_cfg) {
  std::map<SchemeKind, OptimizationResult> results;
  const int K = cfg.K;
  results[SchemeKind::Tdma] = optimize(SchemeSpec(SchemeKind::Tdma, K), channels, cfg, opt_cfg);
  results[SchemeKind::Syn] = optimize(SchemeSpec(SchemeKind::Syn, K), channels, cfg, opt_cfg);

  SchemeSpec asy(SchemeKind::Asy, K);
  OptimizationResult best = optimize(asy, channels, cfg, opt_cfg);
  for (SchemeKind source : {SchemeKind::Tdma, SchemeKind::Syn}) {
    OptimizerConfig warm = opt_cfg;
    warm.warm_start = embed_into_asy(results[source].allocation, channels, cfg);
    OptimizationResult run = optimize(asy, channels, cfg, warm);
    if (run.sum_throughput > best.sum_throughput) best = std::move(run);
  }
  results[SchemeKind::Asy] = std::move(best);
  return results;
}

std::string OptimizationResult::to_json() const {
  nlohmann::json j;
  j["format"] = "wpic-result";
  j["version"] = 1;
  j["allocation"] = nlohmann::json::parse(allocation.to_json());
  j["objective_trace"] = objective_trace;
  j["sum_throughput"] = sum_throughput;
  j["total_energy"] = total_energy;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["feasibility_pass"] = feasibility.pass;
  j["feasibility_worst"] = feasibility.worst();
  return j.dump(2);
}

OptimizationResult OptimizationResult::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "wpic-result")
    throw std::runtime_error("result file: unknown format");
  OptimizationResult r;
  r.allocation = Allocation::from_json(j.at("allocation").dump());
  r.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  r.sum_throughput = j.at("sum_throughput").get<double>();
  r.total_energy = j.at("total_energy").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.feasibility.pass = j.value("feasibility_pass", false);
  return r;
}

void OptimizationResult::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write result file: " + path);
  out << to_json() << "\n";
}

OptimizationResult OptimizationResult::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace wpic
