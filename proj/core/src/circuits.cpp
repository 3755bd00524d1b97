#include "qbnc/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace qbnc {

double zz_single_phase(double xi) { return xi; }
double zz_pair_phase(double xi, double xj) { return (kPi - xi) * (kPi - xj); }

Circuit zz_feature_map(const FeatureMapSpec& spec, std::span<const double> x) {
  const int n = spec.n_qubits;
  if (n < 1) throw std::invalid_argument("zz_feature_map: need at least 1 qubit");
  if (spec.depth < 1) throw std::invalid_argument("zz_feature_map: depth must be >= 1");
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("zz_feature_map: feature count must equal qubit count");
  for (const double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("zz_feature_map: non-finite feature");

  std::vector<std::pair<int, int>> pairs;
  if (spec.entanglement == Entanglement::full) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  }

  Circuit c(n);
  for (int rep = 0; rep < spec.depth; ++rep) {
    for (int q = 0; q < n; ++q) c.h(q);
    for (int q = 0; q < n; ++q) c.rz(q, 2.0 * zz_single_phase(x[q]));
    for (const auto& [i, j] : pairs) {
      c.cnot(i, j);
      c.rz(j, 2.0 * zz_pair_phase(x[i], x[j]));
      c.cnot(i, j);
    }
  }
  return c;
}

Circuit real_amplitudes_ansatz(const AnsatzSpec& spec) {
  const int n = spec.n_qubits;
  if (n < 1) throw std::invalid_argument("real_amplitudes_ansatz: need at least 1 qubit");
  if (spec.layers < 1)
    throw std::invalid_argument("real_amplitudes_ansatz: layers must be >= 1");

  Circuit c(n);
  char name[32];
  for (int l = 0; l <= spec.layers; ++l)
    for (int q = 0; q < n; ++q) {
      std::snprintf(name, sizeof name, "theta[%d]", l * n + q);
      c.add_slot(name);
    }

  for (int l = 0; l < spec.layers; ++l) {
    for (int q = 0; q < n; ++q) c.ry_slot(q, l * n + q);
    for (int q = 0; q + 1 < n; ++q) {
      if (spec.entangler == Entangler::cnot_chain)
        c.cnot(q, q + 1);
      else
        c.cz(q, q + 1);
    }
  }
  for (int q = 0; q < n; ++q) c.ry_slot(q, spec.layers * n + q);
  return c;
}

Circuit concat(const Circuit& a, const Circuit& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("concat: qubit counts differ");
  Circuit c = a;
  const int offset = a.n_slots();
  for (const std::string& name : b.slot_names) c.slot_names.push_back(name);
  for (GateOp g : b.gates) {
    if (g.slot >= 0) g.slot += offset;
    c.gates.push_back(g);
  }
  return c;
}

namespace {

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::P: return "p";
    case GateKind::CNOT: return "cnot";
    case GateKind::CZ: return "cz";
  }
  return "?";
}

}  // namespace

std::string circuit_json(const Circuit& c) {
  nlohmann::json j;
  j["n_qubits"] = c.n_qubits;
  j["gates"] = nlohmann::json::array();
  for (const GateOp& g : c.gates) {
    nlohmann::json e;
    e["gate"] = gate_name(g.kind);
    if (g.two_qubit()) {
      e["qubits"] = {g.q0, g.q1};
    } else {
      e["qubits"] = {g.q0};
      if (g.slot >= 0) {
        e["param"] = c.slot_names[static_cast<std::size_t>(g.slot)];
      } else if (g.kind == GateKind::RY || g.kind == GateKind::RZ ||
                 g.kind == GateKind::P) {
        e["angle"] = g.angle;
      }
    }
    j["gates"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::pair<FeatureScaler, Eigen::MatrixXd> scale_features(
    const Eigen::MatrixXd& train, double lo, double hi) {
  if (train.rows() < 1) throw std::invalid_argument("scale_features: empty data");
  if (!(lo < hi)) throw std::invalid_argument("scale_features: need lo < hi");
  if (!train.allFinite()) throw std::invalid_argument("scale_features: non-finite data");

  FeatureScaler s;
  s.min = train.colwise().minCoeff();
  s.max = train.colwise().maxCoeff();
  s.lo = lo;
  s.hi = hi;
  return {s, apply_scaler(s, train)};
}

Eigen::MatrixXd apply_scaler(const FeatureScaler& scaler, const Eigen::MatrixXd& data) {
  if (data.cols() != scaler.dim())
    throw std::invalid_argument("apply_scaler: column count does not match scaler");
  const double lo = scaler.lo, hi = scaler.hi;
  Eigen::MatrixXd out(data.rows(), data.cols());
  for (int j = 0; j < data.cols(); ++j) {
    const double span = scaler.max[j] - scaler.min[j];
    for (int i = 0; i < data.rows(); ++i) {
      double v;
      if (span <= 0.0) {
        v = 0.5 * (lo + hi);  // constant training feature
      } else {
        v = lo + (hi - lo) * (data(i, j) - scaler.min[j]) / span;
        v = std::clamp(v, lo, hi);  // test rows may exceed the training range
      }
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace qbnc
