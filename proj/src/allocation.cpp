#include "wpic/allocation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wpic {

using nlohmann::json;

Allocation::Allocation(const SchemeSpec& scheme_, int M_, int N_total)
    : scheme(scheme_), M(M_), Nv(N_total + 1) {
  const int K = scheme.K, J = scheme.phases();
  delta.assign(J, 0.0);
  S.assign(K, std::vector<MatrixXcd>(J, MatrixXcd::Zero(M, M)));
  p.assign(K, std::vector<double>(J, 0.0));
  w.assign(K, std::vector<VectorXcd>(J, VectorXcd::Zero(M)));
  v.assign(J, VectorXcd::Zero(Nv));
  for (int j = 0; j < J; ++j) v[j](Nv - 1) = 1.0;
}

void Allocation::set_irs_off() {
  for (auto& vj : v) {
    vj.setZero();
    vj(Nv - 1) = 1.0;
  }
}

namespace {

constexpr const char* kAllocFormat = "wpic-allocation";
constexpr int kAllocVersion = 1;

json cplx_to_json(const MatrixXcd& m) {
  json arr = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      arr.push_back(m(r, c).real());
      arr.push_back(m(r, c).imag());
    }
  return arr;
}

MatrixXcd cplx_from_json(const json& arr, int rows, int cols) {
  if (static_cast<int>(arr.size()) != 2 * rows * cols)
    throw std::runtime_error("allocation file: complex array size mismatch");
  MatrixXcd m(rows, cols);
  int idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double re = arr[idx++].get<double>();
      double im = arr[idx++].get<double>();
      m(r, c) = {re, im};
    }
  return m;
}

}  // namespace

std::string Allocation::to_json() const {
  json j;
  j["format"] = kAllocFormat;
  j["version"] = kAllocVersion;
  j["scheme"] = to_string(scheme.kind);
  j["K"] = scheme.K;
  j["M"] = M;
  j["Nv"] = Nv;
  j["delta"] = delta;
  json js = json::array(), jp = json::array(), jw = json::array(), jv = json::array();
  for (int k = 0; k < scheme.K; ++k)
    for (int ph = 0; ph < phases(); ++ph) {
      js.push_back(cplx_to_json(S[k][ph]));
      jp.push_back(p[k][ph]);
      jw.push_back(cplx_to_json(w[k][ph]));
    }
  for (int ph = 0; ph < phases(); ++ph) jv.push_back(cplx_to_json(v[ph]));
  j["S"] = std::move(js);
  j["p"] = std::move(jp);
  j["w"] = std::move(jw);
  j["v"] = std::move(jv);
  return j.dump();
}

Allocation Allocation::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != kAllocFormat)
    throw std::runtime_error("allocation file: unknown format");
  if (j.value("version", -1) != kAllocVersion)
    throw std::runtime_error("allocation file: unsupported version");
  SchemeSpec scheme(scheme_from_string(j.at("scheme").get<std::string>()), j.at("K").get<int>());
  Allocation a(scheme, j.at("M").get<int>(), j.at("Nv").get<int>() - 1);
  a.delta = j.at("delta").get<std::vector<double>>();
  if (static_cast<int>(a.delta.size()) != a.phases())
    throw std::runtime_error("allocation file: delta size mismatch");
  const json &js = j.at("S"), &jp = j.at("p"), &jw = j.at("w"), &jv = j.at("v");
  int idx = 0;
  for (int k = 0; k < scheme.K; ++k)
    for (int ph = 0; ph < a.phases(); ++ph) {
      a.S[k][ph] = cplx_from_json(js.at(idx), a.M, a.M);
      a.p[k][ph] = jp.at(idx).get<double>();
      a.w[k][ph] = cplx_from_json(jw.at(idx), a.M, 1).col(0);
      ++idx;
    }
  for (int ph = 0; ph < a.phases(); ++ph) a.v[ph] = cplx_from_json(jv.at(ph), a.Nv, 1).col(0);
  return a;
}

Allocation Allocation::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open allocation file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void Allocation::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write allocation file: " + path);
  out << to_json() << "\n";
}

}  // namespace wpic
