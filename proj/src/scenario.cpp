#include "wpic/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wpic/units.hpp"

namespace wpic {

using nlohmann::json;

ScenarioConfig ScenarioConfig::paper_defaults() {
  ScenarioConfig cfg;
  cfg.K = 4;
  cfg.L = 4;
  cfg.M = 2;
  cfg.N_per_irs = 10;
  cfg.P.assign(cfg.K, dbm_to_watts(33.0));
  cfg.sigma2.assign(cfg.K, dbm_to_watts(-80.0));
  return cfg;
}

ScenarioConfig ScenarioConfig::desk_defaults() {
  ScenarioConfig cfg = paper_defaults();
  cfg.K = 2;
  cfg.L = 2;
  cfg.N_per_irs = 4;
  cfg.P.assign(cfg.K, dbm_to_watts(33.0));
  cfg.sigma2.assign(cfg.K, dbm_to_watts(-80.0));
  return cfg;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ScenarioConfig: " + msg); };
  if (K < 1) fail("K must be >= 1");
  if (L < 1) fail("L must be >= 1");
  if (M < 1) fail("M must be >= 1");
  if (N_per_irs < 1) fail("N_per_irs must be >= 1");
  if (!(T > 0.0)) fail("T must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must be in (0, 1]");
  if (static_cast<int>(P.size()) != K) fail("P must have K entries");
  if (static_cast<int>(sigma2.size()) != K) fail("sigma2 must have K entries");
  for (double p : P)
    if (p < 0.0) fail("powers must be >= 0");
  for (double s : sigma2)
    if (!(s > 0.0)) fail("noise powers must be > 0");
  if (rician_irs < 0.0 || rician_direct < 0.0) fail("rician factors must be >= 0");
  if (!(ref_loss > 0.0)) fail("ref_loss must be > 0");
  if (!(d_wd >= 0.0 && d_i >= 0.0 && d_h >= 0.0)) fail("d_wd, d_i, d_h must be >= 0");
  if (!(alpha_irs > 0.0 && alpha_direct > 0.0)) fail("path-loss exponents must be > 0");
}

namespace {

// Reads a per-HAP power-like field that may be scalar or array and may carry
// a _dbm alias. `K` entries result either way.
std::vector<double> read_power_field(const json& j, const std::string& name, int K,
                                     const std::vector<double>& fallback) {
  auto broadcast = [K](const json& node, auto convert) {
    std::vector<double> out;
    if (node.is_array()) {
      for (const auto& x : node) out.push_back(convert(x.get<double>()));
    } else {
      out.assign(K, convert(node.get<double>()));
    }
    if (static_cast<int>(out.size()) != K)
      throw std::invalid_argument("field " + std::string("size mismatch"));
    return out;
  };
  if (j.contains(name)) return broadcast(j.at(name), [](double x) { return x; });
  if (j.contains(name + "_dbm")) return broadcast(j.at(name + "_dbm"), dbm_to_watts);
  return fallback;
}

double read_ratio_field(const json& j, const std::string& name, double fallback) {
  if (j.contains(name)) return j.at(name).get<double>();
  if (j.contains(name + "_db")) return db_to_linear(j.at(name + "_db").get<double>());
  return fallback;
}

}  // namespace

std::string ScenarioConfig::to_json() const {
  json j;
  j["K"] = K;
  j["L"] = L;
  j["M"] = M;
  j["N_per_irs"] = N_per_irs;
  j["T"] = T;
  j["eta"] = eta;
  j["P"] = P;
  j["sigma2"] = sigma2;
  j["d_hap"] = d_hap;
  j["d_wd"] = d_wd;
  j["d_i"] = d_i;
  j["d_h"] = d_h;
  j["alpha_irs"] = alpha_irs;
  j["alpha_direct"] = alpha_direct;
  j["rician_irs"] = rician_irs;
  j["rician_direct"] = rician_direct;
  j["ref_loss"] = ref_loss;
  j["seed"] = seed;
  return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ScenarioConfig base = paper_defaults();
  if (j.contains("profile")) {
    std::string profile = j.at("profile").get<std::string>();
    if (profile == "desk")
      base = desk_defaults();
    else if (profile != "paper")
      throw std::invalid_argument("unknown profile: " + profile);
  }
  ScenarioConfig cfg = base;
  cfg.K = j.value("K", base.K);
  cfg.L = j.value("L", base.L);
  cfg.M = j.value("M", base.M);
  cfg.N_per_irs = j.value("N_per_irs", base.N_per_irs);
  cfg.T = j.value("T", base.T);
  cfg.eta = j.value("eta", base.eta);
  cfg.P = read_power_field(j, "P", cfg.K, std::vector<double>(cfg.K, dbm_to_watts(33.0)));
  cfg.sigma2 =
      read_power_field(j, "sigma2", cfg.K, std::vector<double>(cfg.K, dbm_to_watts(-80.0)));
  cfg.d_hap = j.value("d_hap", base.d_hap);
  cfg.d_wd = j.value("d_wd", base.d_wd);
  cfg.d_i = j.value("d_i", base.d_i);
  cfg.d_h = j.value("d_h", base.d_h);
  cfg.alpha_irs = j.value("alpha_irs", base.alpha_irs);
  cfg.alpha_direct = j.value("alpha_direct", base.alpha_direct);
  cfg.rician_irs = read_ratio_field(j, "rician_irs", base.rician_irs);
  cfg.rician_direct = read_ratio_field(j, "rician_direct", base.rician_direct);
  if (j.contains("ref_loss"))
    cfg.ref_loss = j.at("ref_loss").get<double>();
  else if (j.contains("ref_loss_db"))
    cfg.ref_loss = db_to_linear(j.at("ref_loss_db").get<double>());
  cfg.seed = j.value("seed", base.seed);
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void ScenarioConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json() << "\n";
}

}  // namespace wpic
