#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbnc/rng.hpp"

namespace qbnc {

// Dense statevector over n qubits. Qubit 0 is the least-significant bit of
// the amplitude index; rendered bitstrings put the most-significant qubit
// first, so index 1 of a 3-qubit register prints as "001".
struct Statevector {
  int n_qubits = 0;
  std::vector<std::complex<double>> amps;

  static Statevector zero(int n_qubits);
  double norm() const;
};

std::complex<double> inner_product(const Statevector& a, const Statevector& b);
double fidelity(const Statevector& a, const Statevector& b);  // |<a|b>|^2

std::string bitstring_of_index(std::uint64_t index, int n_qubits);
std::uint64_t index_of_bitstring(const std::string& bits);

enum class GateKind { H, X, Y, Z, RY, RZ, P, CNOT, CZ };

// One gate application. For two-qubit kinds q0 is the control and q1 the
// target (CZ is symmetric). A nonnegative `slot` defers the angle to the
// parameter vector supplied at run time.
struct GateOp {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
  int slot = -1;

  bool two_qubit() const { return kind == GateKind::CNOT || kind == GateKind::CZ; }
};

// Gate list plus named parameter slots ("theta[3]" style names purely for
// reporting). Appending validates qubit indices and angle finiteness.
struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> gates;
  std::vector<std::string> slot_names;

  explicit Circuit(int n = 1);
  int n_slots() const { return static_cast<int>(slot_names.size()); }
  int add_slot(std::string name);

  void h(int q);
  void x(int q);
  void y(int q);
  void z(int q);
  void ry(int q, double angle);
  void rz(int q, double angle);
  void p(int q, double angle);
  void ry_slot(int q, int slot);
  void rz_slot(int q, int slot);
  void cnot(int control, int target);
  void cz(int a, int b);
};

// Adjoint circuit: gates reversed, rotation angles negated. Only defined
// for fully bound circuits (no parameter slots).
Circuit inverse(const Circuit& c);

// Applies one fully bound gate (value in, value out).
Statevector apply_gate(Statevector state, const GateOp& gate);

// Runs the circuit on |0...0> with the given parameter binding.
Statevector run_exact(const Circuit& c, std::span<const double> params = {});

// |amplitude|^2 per basis state, keyed by rendered bitstring.
std::map<std::string, double> probability_map(const Statevector& s);

// Gate-level depolarizing plus readout-flip noise. Readout vectors may be
// empty (no flips), hold one value (broadcast) or one value per qubit.
// p10 = P(read 1 | true 0), p01 = P(read 0 | true 1).
struct NoiseModel {
  double depolarizing_1q = 0.0;
  double depolarizing_2q = 0.0;
  std::vector<double> readout_p10;
  std::vector<double> readout_p01;

  static NoiseModel uniform(double depol_1q, double depol_2q, double p10,
                            double p01);
  double p10_for(int qubit) const;
  double p01_for(int qubit) const;
  bool has_gate_noise() const;
  bool has_readout_noise() const;
  void validate(int n_qubits) const;
};

struct CountsTable {
  std::uint64_t shots = 0;
  std::map<std::string, std::uint64_t> counts;  // bitstring -> occurrences
};

std::map<std::string, double> counts_to_probabilities(const CountsTable& t);

// {"shots": N, "counts": {bitstring: occurrences, ...}} with sorted keys.
std::string counts_json(const CountsTable& t);

// Measures the circuit `shots` times with a seeded generator. Without gate
// noise the exact state is prepared once and sampled; with depolarizing
// noise each shot runs its own trajectory (a uniformly random Pauli follows
// a gate with the configured probability). Readout flips are applied to
// every sampled bitstring. A noise model with all probabilities zero is
// bit-exact with the noiseless path under the same seed.
CountsTable sample(const Circuit& c, std::span<const double> params,
                   std::uint64_t shots, std::uint64_t seed,
                   const std::optional<NoiseModel>& noise = std::nullopt);

// Per-qubit confusion matrices [[1-p10, p01], [p10, 1-p01]] (column =
// prepared bit, row = recorded bit; columns sum to 1).
using ReadoutCalibration = std::vector<Eigen::Matrix2d>;
ReadoutCalibration readout_calibration(const NoiseModel& noise, int n_qubits);

// Tensored inverse of the calibration applied to the empirical distribution.
// `quasi` sums to 1 but may go negative; `projected` is its Euclidean
// projection onto the probability simplex. Near-singular calibration
// (|1 - p10 - p01| <= 1e-6 on any qubit) is an error.
struct MitigationResult {
  std::map<std::string, double> quasi;
  std::map<std::string, double> projected;
};
MitigationResult mitigate_counts(const CountsTable& counts,
                                 const ReadoutCalibration& calibration);

// 0.5 * L1 distance between two distributions keyed by bitstring.
double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b);

}  // namespace qbnc
