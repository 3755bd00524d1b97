#include "qbnc/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "qbnc/linalg.hpp"

namespace qbnc {

namespace {

using cd = std::complex<double>;

constexpr int kMaxQubits = 24;

void check_qubit(int q, int n, const char* what) {
  if (q < 0 || q >= n)
    throw std::invalid_argument(std::string(what) + ": qubit index out of range");
}

bool takes_angle(GateKind k) {
  return k == GateKind::RY || k == GateKind::RZ || k == GateKind::P;
}

std::array<cd, 4> single_qubit_matrix(GateKind kind, double angle) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const cd i01(0.0, 1.0);
  switch (kind) {
    case GateKind::H:
      return {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2};
    case GateKind::X:
      return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y:
      return {0.0, -i01, i01, 0.0};
    case GateKind::Z:
      return {1.0, 0.0, 0.0, -1.0};
    case GateKind::RY: {
      const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
      return {c, -s, s, c};
    }
    case GateKind::RZ: {
      const cd e = std::exp(cd(0.0, angle / 2.0));
      return {std::conj(e), 0.0, 0.0, e};
    }
    case GateKind::P:
      return {1.0, 0.0, 0.0, std::exp(cd(0.0, angle))};
    default:
      throw std::logic_error("single_qubit_matrix: not a single-qubit gate");
  }
}

void apply_single(std::vector<cd>& v, int q, const std::array<cd, 4>& m) {
  const std::uint64_t mask = 1ull << q;
  const std::uint64_t size = v.size();
  for (std::uint64_t i = 0; i < size; ++i) {
    if (i & mask) continue;
    const cd a0 = v[i], a1 = v[i | mask];
    v[i] = m[0] * a0 + m[1] * a1;
    v[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

void apply_cnot(std::vector<cd>& v, int control, int target) {
  const std::uint64_t cm = 1ull << control, tm = 1ull << target;
  const std::uint64_t size = v.size();
  for (std::uint64_t i = 0; i < size; ++i)
    if ((i & cm) && !(i & tm)) std::swap(v[i], v[i | tm]);
}

void apply_cz(std::vector<cd>& v, int a, int b) {
  const std::uint64_t am = 1ull << a, bm = 1ull << b;
  const std::uint64_t size = v.size();
  for (std::uint64_t i = 0; i < size; ++i)
    if ((i & am) && (i & bm)) v[i] = -v[i];
}

void apply_resolved(Statevector& s, const GateOp& g, double angle) {
  switch (g.kind) {
    case GateKind::CNOT:
      apply_cnot(s.amps, g.q0, g.q1);
      return;
    case GateKind::CZ:
      apply_cz(s.amps, g.q0, g.q1);
      return;
    default:
      apply_single(s.amps, g.q0, single_qubit_matrix(g.kind, angle));
  }
}

double resolve_angle(const GateOp& g, std::span<const double> params) {
  if (g.slot < 0) return g.angle;
  if (g.slot >= static_cast<int>(params.size()))
    throw std::invalid_argument("run: parameter slot without binding");
  return params[g.slot];
}

void apply_pauli(Statevector& s, int pauli, int q) {
  // pauli: 1 = X, 2 = Y, 3 = Z
  static const GateKind kinds[] = {GateKind::H, GateKind::X, GateKind::Y,
                                   GateKind::Z};
  if (pauli < 1 || pauli > 3) throw std::logic_error("apply_pauli: bad index");
  apply_single(s.amps, q, single_qubit_matrix(kinds[pauli], 0.0));
}

std::vector<double> cumulative_probs(const Statevector& s) {
  std::vector<double> cum(s.amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.amps.size(); ++i) {
    acc += std::norm(s.amps[i]);
    cum[i] = acc;
  }
  return cum;
}

std::uint64_t draw_index(const std::vector<double>& cum, double u) {
  const double t = u * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), t);
  return it == cum.end() ? cum.size() - 1 : static_cast<std::uint64_t>(it - cum.begin());
}

std::uint64_t apply_readout_flips(std::uint64_t idx, int n,
                                  const NoiseModel& noise, Rng& rng) {
  for (int q = 0; q < n; ++q) {
    const bool bit = (idx >> q) & 1ull;
    const double p = bit ? noise.p01_for(q) : noise.p10_for(q);
    if (p > 0.0 && rng.uniform01() < p) idx ^= (1ull << q);
  }
  return idx;
}

Statevector run_trajectory(const Circuit& c, std::span<const double> params,
                           const NoiseModel& noise, Rng& rng) {
  Statevector s = Statevector::zero(c.n_qubits);
  for (const auto& g : c.gates) {
    apply_resolved(s, g, resolve_angle(g, params));
    if (g.two_qubit()) {
      if (noise.depolarizing_2q > 0.0 && rng.uniform01() < noise.depolarizing_2q) {
        const int k = static_cast<int>(rng.below(15)) + 1;  // skip identity
        if (k >> 2) apply_pauli(s, k >> 2, g.q0);
        if (k & 3) apply_pauli(s, k & 3, g.q1);
      }
    } else if (noise.depolarizing_1q > 0.0 &&
               rng.uniform01() < noise.depolarizing_1q) {
      apply_pauli(s, static_cast<int>(rng.below(3)) + 1, g.q0);
    }
  }
  return s;
}

}  // namespace

Statevector Statevector::zero(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("Statevector: qubit count must be in [1, 24]");
  Statevector s;
  s.n_qubits = n_qubits;
  s.amps.assign(1ull << n_qubits, cd(0.0, 0.0));
  s.amps[0] = 1.0;
  return s;
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps) acc += std::norm(a);
  return std::sqrt(acc);
}

std::complex<double> inner_product(const Statevector& a, const Statevector& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("inner_product: qubit counts differ");
  cd acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.amps.size(); ++i)
    acc += std::conj(a.amps[i]) * b.amps[i];
  return acc;
}

double fidelity(const Statevector& a, const Statevector& b) {
  return std::norm(inner_product(a, b));
}

std::string bitstring_of_index(std::uint64_t index, int n_qubits) {
  std::string s(n_qubits, '0');
  for (int q = 0; q < n_qubits; ++q)
    if ((index >> q) & 1ull) s[n_qubits - 1 - q] = '1';
  return s;
}

std::uint64_t index_of_bitstring(const std::string& bits) {
  std::uint64_t idx = 0;
  const int n = static_cast<int>(bits.size());
  for (int pos = 0; pos < n; ++pos) {
    const char ch = bits[pos];
    if (ch != '0' && ch != '1')
      throw std::invalid_argument("index_of_bitstring: bad character in '" + bits + "'");
    if (ch == '1') idx |= 1ull << (n - 1 - pos);
  }
  return idx;
}

Circuit::Circuit(int n) : n_qubits(n) {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("Circuit: qubit count must be in [1, 24]");
}

int Circuit::add_slot(std::string name) {
  slot_names.push_back(std::move(name));
  return static_cast<int>(slot_names.size()) - 1;
}

namespace {
GateOp make_single(GateKind k, int q, double angle, int slot) {
  GateOp g;
  g.kind = k;
  g.q0 = q;
  g.angle = angle;
  g.slot = slot;
  return g;
}
}  // namespace

void Circuit::h(int q) { check_qubit(q, n_qubits, "h"); gates.push_back(make_single(GateKind::H, q, 0, -1)); }
void Circuit::x(int q) { check_qubit(q, n_qubits, "x"); gates.push_back(make_single(GateKind::X, q, 0, -1)); }
void Circuit::y(int q) { check_qubit(q, n_qubits, "y"); gates.push_back(make_single(GateKind::Y, q, 0, -1)); }
void Circuit::z(int q) { check_qubit(q, n_qubits, "z"); gates.push_back(make_single(GateKind::Z, q, 0, -1)); }

void Circuit::ry(int q, double angle) {
  check_qubit(q, n_qubits, "ry");
  if (!std::isfinite(angle)) throw std::invalid_argument("ry: non-finite angle");
  gates.push_back(make_single(GateKind::RY, q, angle, -1));
}

void Circuit::rz(int q, double angle) {
  check_qubit(q, n_qubits, "rz");
  if (!std::isfinite(angle)) throw std::invalid_argument("rz: non-finite angle");
  gates.push_back(make_single(GateKind::RZ, q, angle, -1));
}

void Circuit::p(int q, double angle) {
  check_qubit(q, n_qubits, "p");
  if (!std::isfinite(angle)) throw std::invalid_argument("p: non-finite angle");
  gates.push_back(make_single(GateKind::P, q, angle, -1));
}

void Circuit::ry_slot(int q, int slot) {
  check_qubit(q, n_qubits, "ry_slot");
  if (slot < 0 || slot >= n_slots())
    throw std::invalid_argument("ry_slot: unknown parameter slot");
  gates.push_back(make_single(GateKind::RY, q, 0.0, slot));
}

void Circuit::rz_slot(int q, int slot) {
  check_qubit(q, n_qubits, "rz_slot");
  if (slot < 0 || slot >= n_slots())
    throw std::invalid_argument("rz_slot: unknown parameter slot");
  gates.push_back(make_single(GateKind::RZ, q, 0.0, slot));
}

void Circuit::cnot(int control, int target) {
  check_qubit(control, n_qubits, "cnot");
  check_qubit(target, n_qubits, "cnot");
  if (control == target) throw std::invalid_argument("cnot: control equals target");
  GateOp g;
  g.kind = GateKind::CNOT;
  g.q0 = control;
  g.q1 = target;
  gates.push_back(g);
}

void Circuit::cz(int a, int b) {
  check_qubit(a, n_qubits, "cz");
  check_qubit(b, n_qubits, "cz");
  if (a == b) throw std::invalid_argument("cz: qubits must differ");
  GateOp g;
  g.kind = GateKind::CZ;
  g.q0 = a;
  g.q1 = b;
  gates.push_back(g);
}

Circuit inverse(const Circuit& c) {
  Circuit inv(c.n_qubits);
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    GateOp g = *it;
    if (g.slot >= 0)
      throw std::invalid_argument("inverse: circuit has unbound parameter slots");
    if (takes_angle(g.kind)) g.angle = -g.angle;
    inv.gates.push_back(g);
  }
  return inv;
}

Statevector apply_gate(Statevector state, const GateOp& gate) {
  const int n = state.n_qubits;
  check_qubit(gate.q0, n, "apply_gate");
  if (gate.two_qubit()) check_qubit(gate.q1, n, "apply_gate");
  if (gate.slot >= 0)
    throw std::invalid_argument("apply_gate: gate has an unbound parameter slot");
  apply_resolved(state, gate, gate.angle);
  return state;
}

Statevector run_exact(const Circuit& c, std::span<const double> params) {
  if (static_cast<int>(params.size()) != c.n_slots())
    throw std::invalid_argument("run_exact: expected " + std::to_string(c.n_slots()) +
                                " parameters, got " + std::to_string(params.size()));
  for (const double v : params)
    if (!std::isfinite(v)) throw std::invalid_argument("run_exact: non-finite parameter");
  Statevector s = Statevector::zero(c.n_qubits);
  for (const auto& g : c.gates) apply_resolved(s, g, resolve_angle(g, params));
  return s;
}

std::map<std::string, double> probability_map(const Statevector& s) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < s.amps.size(); ++i)
    out[bitstring_of_index(i, s.n_qubits)] = std::norm(s.amps[i]);
  return out;
}

NoiseModel NoiseModel::uniform(double depol_1q, double depol_2q, double p10,
                               double p01) {
  NoiseModel n;
  n.depolarizing_1q = depol_1q;
  n.depolarizing_2q = depol_2q;
  n.readout_p10 = {p10};
  n.readout_p01 = {p01};
  return n;
}

namespace {
double readout_value(const std::vector<double>& v, int qubit) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  if (qubit < 0 || qubit >= static_cast<int>(v.size()))
    throw std::invalid_argument("NoiseModel: readout vector does not cover qubit");
  return v[qubit];
}
}  // namespace

double NoiseModel::p10_for(int qubit) const { return readout_value(readout_p10, qubit); }
double NoiseModel::p01_for(int qubit) const { return readout_value(readout_p01, qubit); }

bool NoiseModel::has_gate_noise() const {
  return depolarizing_1q > 0.0 || depolarizing_2q > 0.0;
}

bool NoiseModel::has_readout_noise() const {
  auto any = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double p) { return p > 0.0; });
  };
  return any(readout_p10) || any(readout_p01);
}

void NoiseModel::validate(int n_qubits) const {
  auto check_prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string("NoiseModel: ") + what +
                                  " must lie in [0, 1]");
  };
  check_prob(depolarizing_1q, "depolarizing_1q");
  check_prob(depolarizing_2q, "depolarizing_2q");
  auto check_vec = [&](const std::vector<double>& v, const char* what) {
    if (!v.empty() && v.size() != 1 && static_cast<int>(v.size()) != n_qubits)
      throw std::invalid_argument(std::string("NoiseModel: ") + what +
                                  " must have 0, 1 or n_qubits entries");
    for (double p : v) check_prob(p, what);
  };
  check_vec(readout_p10, "readout_p10");
  check_vec(readout_p01, "readout_p01");
}

std::map<std::string, double> counts_to_probabilities(const CountsTable& t) {
  if (t.shots == 0) throw std::invalid_argument("counts_to_probabilities: zero shots");
  std::map<std::string, double> out;
  for (const auto& [bits, c] : t.counts)
    out[bits] = static_cast<double>(c) / static_cast<double>(t.shots);
  return out;
}

std::string counts_json(const CountsTable& t) {
  nlohmann::json j;
  j["shots"] = t.shots;
  j["counts"] = nlohmann::json::object();
  for (const auto& [bits, c] : t.counts) j["counts"][bits] = c;
  return j.dump(2) + "\n";
}

CountsTable sample(const Circuit& c, std::span<const double> params,
                   std::uint64_t shots, std::uint64_t seed,
                   const std::optional<NoiseModel>& noise) {
  if (shots == 0) throw std::invalid_argument("sample: shots must be positive");
  if (static_cast<int>(params.size()) != c.n_slots())
    throw std::invalid_argument("sample: parameter count does not match slots");
  static const NoiseModel kNoNoise{};
  const NoiseModel& nm = noise ? *noise : kNoNoise;
  nm.validate(c.n_qubits);

  Rng rng(seed);
  CountsTable table;
  table.shots = shots;

  if (!nm.has_gate_noise()) {
    const Statevector s = run_exact(c, params);
    const auto cum = cumulative_probs(s);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
      std::uint64_t idx = draw_index(cum, rng.uniform01());
      idx = apply_readout_flips(idx, c.n_qubits, nm, rng);
      ++table.counts[bitstring_of_index(idx, c.n_qubits)];
    }
  } else {
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
      const Statevector s = run_trajectory(c, params, nm, rng);
      const auto cum = cumulative_probs(s);
      std::uint64_t idx = draw_index(cum, rng.uniform01());
      idx = apply_readout_flips(idx, c.n_qubits, nm, rng);
      ++table.counts[bitstring_of_index(idx, c.n_qubits)];
    }
  }
  return table;
}

ReadoutCalibration readout_calibration(const NoiseModel& noise, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("readout_calibration: bad qubit count");
  noise.validate(n_qubits);
  ReadoutCalibration cal(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    const double p10 = noise.p10_for(q), p01 = noise.p01_for(q);
    cal[q] << 1.0 - p10, p01, p10, 1.0 - p01;
  }
  return cal;
}

MitigationResult mitigate_counts(const CountsTable& counts,
                                 const ReadoutCalibration& calibration) {
  if (counts.shots == 0) throw std::invalid_argument("mitigate_counts: zero shots");
  const int n = static_cast<int>(calibration.size());
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("mitigate_counts: bad calibration size");

  Eigen::VectorXd p = Eigen::VectorXd::Zero(1ll << n);
  for (const auto& [bits, c] : counts.counts) {
    if (static_cast<int>(bits.size()) != n)
      throw std::invalid_argument("mitigate_counts: bitstring '" + bits +
                                  "' does not match calibration width");
    p[static_cast<long>(index_of_bitstring(bits))] +=
        static_cast<double>(c) / static_cast<double>(counts.shots);
  }

  // Tensored inverse, one qubit axis at a time.
  for (int q = 0; q < n; ++q) {
    const Eigen::Matrix2d& m = calibration[q];
    const double det = m.determinant();
    if (std::abs(det) <= 1e-6)
      throw std::invalid_argument("mitigate_counts: calibration for qubit " +
                                  std::to_string(q) + " is singular");
    Eigen::Matrix2d inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    inv /= det;
    const std::uint64_t mask = 1ull << q;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(p.size()); ++i) {
      if (i & mask) continue;
      const double a0 = p[i], a1 = p[i | mask];
      p[i] = inv(0, 0) * a0 + inv(0, 1) * a1;
      p[i | mask] = inv(1, 0) * a0 + inv(1, 1) * a1;
    }
  }

  const Eigen::VectorXd proj = project_to_simplex(p);

  MitigationResult out;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(p.size()); ++i) {
    const std::string bits = bitstring_of_index(i, n);
    out.quasi[bits] = p[static_cast<long>(i)];
    out.projected[bits] = proj[static_cast<long>(i)];
  }
  return out;
}

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b) {
  double acc = 0.0;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    acc += std::abs(v - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) acc += std::abs(v);
  return 0.5 * acc;
}

}  // namespace qbnc
