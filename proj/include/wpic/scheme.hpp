#pragma once

#include <stdexcept>
#include <string>

namespace wpic {

enum class SchemeKind { Asy, Tdma, Syn };

std::string to_string(SchemeKind kind);
SchemeKind scheme_from_string(const std::string& name);

// Phase-activity masks for the three transmission schemes, all 0-based:
// WD k and HAP i in 0..K-1, phase j in 0..J-1.
//
//   Asy:  J = K+1. WD k harvests while phases j <= k run and transmits in
//         j >= k+1; HAP i radiates energy in j <= i and decodes in j >= i+1.
//   TDMA: Asy with transmission/reception restricted to the own slot,
//         p_{k,j} = 0 and w_{i,j} = 0 outside j == k+1 (resp. i+1).
//   Syn:  J = 2, common harvest deadline; everyone harvests in phase 0 and
//         transmits in phase 1.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::Asy;
  int K = 0;

  SchemeSpec() = default;
  SchemeSpec(SchemeKind kind_, int K_) : kind(kind_), K(K_) {
    if (K < 1) throw std::invalid_argument("SchemeSpec: K must be >= 1");
  }

  int phases() const { return kind == SchemeKind::Syn ? 2 : K + 1; }

  bool tx(int k, int j) const {
    switch (kind) {
      case SchemeKind::Asy: return j >= k + 1;
      case SchemeKind::Tdma: return j == k + 1;
      case SchemeKind::Syn: return j == 1;
    }
    return false;
  }
  bool harvests(int k, int j) const {
    return kind == SchemeKind::Syn ? j == 0 : j <= k;
  }
  bool hap_energy(int i, int j) const {
    return kind == SchemeKind::Syn ? j == 0 : j <= i;
  }
  bool rx(int i, int j) const {
    switch (kind) {
      case SchemeKind::Asy: return j >= i + 1;
      case SchemeKind::Tdma: return j == i + 1;
      case SchemeKind::Syn: return j == 1;
    }
    return false;
  }
};

inline std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Asy: return "asy";
    case SchemeKind::Tdma: return "tdma";
    case SchemeKind::Syn: return "syn";
  }
  return "?";
}

inline SchemeKind scheme_from_string(const std::string& name) {
  if (name == "asy") return SchemeKind::Asy;
  if (name == "tdma") return SchemeKind::Tdma;
  if (name == "syn") return SchemeKind::Syn;
  throw std::invalid_argument("unknown scheme: " + name);
}

}  // namespace wpic
