#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>

#include "qbnc/qsim.hpp"

namespace qbnc {

inline constexpr double kPi = 3.14159265358979323846;

enum class Entanglement { full, linear };
enum class Entangler { cnot_chain, cz_chain };

// Second-order Z feature map: one feature per qubit, nonlinear pair phases.
struct FeatureMapSpec {
  int n_qubits = 2;
  int depth = 2;  // repetitions of the H + phase block
  Entanglement entanglement = Entanglement::full;
};

// Phase functions of the encoding: phi(x_i) = x_i on single qubits and
// phi(x_i, x_j) = (pi - x_i) * (pi - x_j) on entangled pairs.
double zz_single_phase(double xi);
double zz_pair_phase(double xi, double xj);

// Per repetition: H on every qubit; RZ(2 * x_i) on qubit i; then for every
// pair (i, j) in entanglement order: CNOT(i, j), RZ(2 * phi(x_i, x_j)) on j,
// CNOT(i, j). `full` takes all i < j in lexicographic order, `linear` takes
// neighbors (0,1), (1,2), ... Feature count must equal n_qubits.
Circuit zz_feature_map(const FeatureMapSpec& spec, std::span<const double> x);

// Alternating RY layers and an entangler chain (0,1), (1,2), ..., ending
// with a final RY layer: layers entangling blocks, layers+1 rotation layers.
struct AnsatzSpec {
  int n_qubits = 2;
  int layers = 2;
  Entangler entangler = Entangler::cnot_chain;

  int parameter_count() const { return n_qubits * (layers + 1); }
};

// Parameter slots are ordered layer-major, qubit-ascending: slot l*n + q
// drives the RY on qubit q in rotation layer l.
Circuit real_amplitudes_ansatz(const AnsatzSpec& spec);

// Gates of b appended to a copy of a; parameter slots of b are renumbered
// to follow a's. Qubit counts must match.
Circuit concat(const Circuit& a, const Circuit& b);

// One JSON object per gate (kind, qubits, angle or slot name), in program
// order. Meant for golden-file comparisons, not round-tripping.
std::string circuit_json(const Circuit& c);

// Per-feature affine map of the training range onto [lo, hi]; application
// clips to the target interval. A constant feature maps to the midpoint.
struct FeatureScaler {
  Eigen::VectorXd min;  // training minima, per feature
  Eigen::VectorXd max;  // training maxima
  double lo = 0.0;
  double hi = kPi;

  int dim() const { return static_cast<int>(min.size()); }
};

std::pair<FeatureScaler, Eigen::MatrixXd> scale_features(
    const Eigen::MatrixXd& train, double lo = 0.0, double hi = kPi);
Eigen::MatrixXd apply_scaler(const FeatureScaler& scaler,
                             const Eigen::MatrixXd& data);

}  // namespace qbnc
