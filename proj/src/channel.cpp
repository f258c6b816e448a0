#include "wpic/channel.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wpic {

using nlohmann::json;
using std::complex;

double path_loss(double distance_m, double exponent, double ref_loss) {
  if (!(distance_m >= 0.0)) throw std::invalid_argument("path_loss: invalid geometry");
  double d = std::max(distance_m, kMinLinkDistance);
  return ref_loss * std::pow(d, -exponent);
}

MatrixXcd los_matrix(int rows, int cols, double cos_rx, double cos_tx) {
  const complex<double> j(0.0, 1.0);
  VectorXcd a_rx(rows), a_tx(cols);
  for (int m = 0; m < rows; ++m)
    a_rx(m) = std::exp(j * (std::numbers::pi * m * cos_rx));
  for (int n = 0; n < cols; ++n)
    a_tx(n) = std::exp(j * (std::numbers::pi * n * cos_tx));
  return a_rx * a_tx.adjoint();
}

MatrixXcd sample_rician(int rows, int cols, double gain, double kappa, Rng& rng,
                        double cos_rx, double cos_tx) {
  if (gain < 0.0) throw std::invalid_argument("sample_rician: negative gain");
  if (kappa < 0.0) throw std::invalid_argument("sample_rician: negative kappa");
  double w_los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
  double w_nlos = std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / (1.0 + kappa));
  MatrixXcd out = w_los * los_matrix(rows, cols, cos_rx, cos_tx);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) out(m, n) += w_nlos * rng.complex_gaussian();
  return std::sqrt(gain) * out;
}

namespace {

// Direction cosine of the x-axis ULA convention, seen from `at` toward `toward`.
double link_cos(const Vec3& at, const Vec3& toward) {
  double d = distance(at, toward);
  if (d < 1e-12) return 0.0;
  return (toward.x - at.x) / d;
}

}  // namespace

void ChannelSet::rebuild_composites() {
  psi.assign(K, std::vector<MatrixXcd>(K));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      MatrixXcd m(M, N + 1);
      int col = 0;
      for (int l = 0; l < L; ++l) {
        // H_{l,i} diag(e_{k,l}) occupies IRS l's column block.
        for (int n = 0; n < n_per_irs[l]; ++n) m.col(col + n) = h[l][i].col(n) * e[k][l](n);
        col += n_per_irs[l];
      }
      m.col(N) = g[k][i];
      psi[k][i] = std::move(m);
    }
  }
}

ChannelSet assemble_channels(const ScenarioConfig& cfg) {
  cfg.validate();
  NodePositions pos = place_nodes(cfg);
  Rng rng(cfg.seed);
  return assemble_channels(cfg, pos, rng);
}

ChannelSet assemble_channels(const ScenarioConfig& cfg, const NodePositions& pos, Rng& rng) {
  ChannelSet cs;
  cs.K = cfg.K;
  cs.L = cfg.L;
  cs.M = cfg.M;
  cs.n_per_irs.assign(cfg.L, cfg.N_per_irs);
  cs.N = cfg.n_total();

  // Sampling order is fixed (e, then h, then g, in index order) so a seed
  // pins the whole set bit-for-bit.
  cs.e.assign(cs.K, std::vector<VectorXcd>(cs.L));
  for (int k = 0; k < cs.K; ++k) {
    for (int l = 0; l < cs.L; ++l) {
      double gain = path_loss(distance(pos.wd[k], pos.irs[l]), cfg.alpha_irs, cfg.ref_loss);
      cs.e[k][l] = sample_rician(cs.n_per_irs[l], 1, gain, cfg.rician_irs, rng,
                                 link_cos(pos.irs[l], pos.wd[k]), 0.0)
                       .col(0);
    }
  }
  cs.h.assign(cs.L, std::vector<MatrixXcd>(cs.K));
  for (int l = 0; l < cs.L; ++l) {
    for (int i = 0; i < cs.K; ++i) {
      double gain = path_loss(distance(pos.irs[l], pos.hap[i]), cfg.alpha_irs, cfg.ref_loss);
      cs.h[l][i] = sample_rician(cs.M, cs.n_per_irs[l], gain, cfg.rician_irs, rng,
                                 link_cos(pos.hap[i], pos.irs[l]), link_cos(pos.irs[l], pos.hap[i]));
    }
  }
  cs.g.assign(cs.K, std::vector<VectorXcd>(cs.K));
  for (int k = 0; k < cs.K; ++k) {
    for (int i = 0; i < cs.K; ++i) {
      double gain = path_loss(distance(pos.wd[k], pos.hap[i]), cfg.alpha_direct, cfg.ref_loss);
      cs.g[k][i] = sample_rician(cs.M, 1, gain, cfg.rician_direct, rng,
                                 link_cos(pos.hap[i], pos.wd[k]), 0.0)
                       .col(0);
    }
  }
  cs.rebuild_composites();
  return cs;
}

namespace {

constexpr const char* kChannelFormat = "wpic-channels";
constexpr int kChannelVersion = 1;

json complex_matrix_to_json(const MatrixXcd& m) {
  // Row-major flattened (re, im) pairs.
  json arr = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      arr.push_back(m(r, c).real());
      arr.push_back(m(r, c).imag());
    }
  }
  return arr;
}

MatrixXcd complex_matrix_from_json(const json& arr, int rows, int cols) {
  if (static_cast<int>(arr.size()) != 2 * rows * cols)
    throw std::runtime_error("channel file: complex array size mismatch");
  MatrixXcd m(rows, cols);
  int idx = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double re = arr[idx++].get<double>();
      double im = arr[idx++].get<double>();
      m(r, c) = {re, im};
    }
  }
  return m;
}

}  // namespace

std::string channels_to_json(const ChannelSet& cs, const ScenarioConfig& cfg) {
  json j;
  j["format"] = kChannelFormat;
  j["version"] = kChannelVersion;
  j["config"] = json::parse(cfg.to_json());
  j["K"] = cs.K;
  j["L"] = cs.L;
  j["M"] = cs.M;
  j["N"] = cs.N;
  j["n_per_irs"] = cs.n_per_irs;
  json je = json::array(), jh = json::array(), jg = json::array();
  for (int k = 0; k < cs.K; ++k)
    for (int l = 0; l < cs.L; ++l) je.push_back(complex_matrix_to_json(cs.e[k][l]));
  for (int l = 0; l < cs.L; ++l)
    for (int i = 0; i < cs.K; ++i) jh.push_back(complex_matrix_to_json(cs.h[l][i]));
  for (int k = 0; k < cs.K; ++k)
    for (int i = 0; i < cs.K; ++i) jg.push_back(complex_matrix_to_json(cs.g[k][i]));
  j["e"] = std::move(je);
  j["h"] = std::move(jh);
  j["g"] = std::move(jg);
  return j.dump();
}

std::pair<ChannelSet, ScenarioConfig> channels_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != kChannelFormat)
    throw std::runtime_error("channel file: unknown format");
  if (j.value("version", -1) != kChannelVersion)
    throw std::runtime_error("channel file: unsupported version");
  ScenarioConfig cfg = ScenarioConfig::from_json(j.at("config").dump());
  ChannelSet cs;
  cs.K = j.at("K").get<int>();
  cs.L = j.at("L").get<int>();
  cs.M = j.at("M").get<int>();
  cs.N = j.at("N").get<int>();
  cs.n_per_irs = j.at("n_per_irs").get<std::vector<int>>();
  const json &je = j.at("e"), &jh = j.at("h"), &jg = j.at("g");
  cs.e.assign(cs.K, std::vector<VectorXcd>(cs.L));
  cs.h.assign(cs.L, std::vector<MatrixXcd>(cs.K));
  cs.g.assign(cs.K, std::vector<VectorXcd>(cs.K));
  int idx = 0;
  for (int k = 0; k < cs.K; ++k)
    for (int l = 0; l < cs.L; ++l)
      cs.e[k][l] = complex_matrix_from_json(je.at(idx++), cs.n_per_irs[l], 1).col(0);
  idx = 0;
  for (int l = 0; l < cs.L; ++l)
    for (int i = 0; i < cs.K; ++i)
      cs.h[l][i] = complex_matrix_from_json(jh.at(idx++), cs.M, cs.n_per_irs[l]);
  idx = 0;
  for (int k = 0; k < cs.K; ++k)
    for (int i = 0; i < cs.K; ++i)
      cs.g[k][i] = complex_matrix_from_json(jg.at(idx++), cs.M, 1).col(0);
  cs.rebuild_composites();
  return {std::move(cs), std::move(cfg)};
}

void save_channel_file(const std::string& path, const ChannelSet& cs, const ScenarioConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write channel file: " + path);
  out << channels_to_json(cs, cfg) << "\n";
}

std::pair<ChannelSet, ScenarioConfig> load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return channels_from_json(ss.str());
}

}  // namespace wpic
