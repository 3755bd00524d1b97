#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "qbnc/circuits.hpp"
#include "qbnc/qsim.hpp"
#include "support/oracles.hpp"

using namespace qbnc;

namespace {

std::vector<double> random_angles(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& v : out)
    v = (static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * kPi;
  return out;
}

double state_diff(const Statevector& s, const Eigen::VectorXcd& want) {
  double worst = 0.0;
  for (int i = 0; i < want.size(); ++i)
    worst = std::max(worst, std::abs(s.amps[static_cast<std::size_t>(i)] - want(i)));
  return worst;
}

}  // namespace

TEST_CASE("encoding phase functions") {
  CHECK(zz_single_phase(0.7) == 0.7);
  CHECK(zz_pair_phase(0.0, 0.0) == doctest::Approx(kPi * kPi).epsilon(1e-15));
  CHECK(zz_pair_phase(kPi, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(zz_pair_phase(0.2, 0.5) ==
        doctest::Approx((kPi - 0.2) * (kPi - 0.5)).epsilon(1e-15));
}

TEST_CASE("two-qubit single-repetition feature map has the documented gate list") {
  FeatureMapSpec spec;
  spec.n_qubits = 2;
  spec.depth = 1;
  const std::vector<double> x = {0.0, 0.0};
  const Circuit c = zz_feature_map(spec, x);

  REQUIRE(c.gates.size() == 7);
  CHECK(c.gates[0].kind == GateKind::H);
  CHECK(c.gates[0].q0 == 0);
  CHECK(c.gates[1].kind == GateKind::H);
  CHECK(c.gates[1].q0 == 1);
  CHECK(c.gates[2].kind == GateKind::RZ);
  CHECK(c.gates[2].q0 == 0);
  CHECK(c.gates[2].angle == 0.0);
  CHECK(c.gates[3].kind == GateKind::RZ);
  CHECK(c.gates[3].q0 == 1);
  CHECK(c.gates[3].angle == 0.0);
  CHECK(c.gates[4].kind == GateKind::CNOT);
  CHECK(c.gates[4].q0 == 0);
  CHECK(c.gates[4].q1 == 1);
  CHECK(c.gates[5].kind == GateKind::RZ);
  CHECK(c.gates[5].q0 == 1);
  CHECK(c.gates[5].angle == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
  CHECK(c.gates[6].kind == GateKind::CNOT);
  CHECK(c.n_slots() == 0);
}

TEST_CASE("deeper maps repeat the single-repetition block verbatim") {
  FeatureMapSpec one;
  one.n_qubits = 3;
  one.depth = 1;
  FeatureMapSpec two = one;
  two.depth = 2;
  const std::vector<double> x = {0.4, 1.3, 2.2};
  const Circuit a = zz_feature_map(one, x);
  const Circuit b = zz_feature_map(two, x);
  REQUIRE(b.gates.size() == 2 * a.gates.size());
  for (std::size_t i = 0; i < b.gates.size(); ++i) {
    const GateOp& want = a.gates[i % a.gates.size()];
    CHECK(b.gates[i].kind == want.kind);
    CHECK(b.gates[i].q0 == want.q0);
    CHECK(b.gates[i].q1 == want.q1);
    CHECK(b.gates[i].angle == want.angle);
  }
}

TEST_CASE("full entanglement visits every pair, linear only neighbors") {
  FeatureMapSpec spec;
  spec.n_qubits = 3;
  spec.depth = 1;
  const std::vector<double> x = {0.1, 0.2, 0.3};

  const auto pairs_of = [](const Circuit& c) {
    std::vector<std::pair<int, int>> ps;
    for (std::size_t i = 0; i + 1 < c.gates.size(); ++i)
      if (c.gates[i].kind == GateKind::CNOT && c.gates[i + 1].kind == GateKind::RZ)
        ps.emplace_back(c.gates[i].q0, c.gates[i].q1);
    return ps;
  };

  const auto full = pairs_of(zz_feature_map(spec, x));
  REQUIRE(full.size() == 3);
  CHECK(full[0] == std::pair<int, int>(0, 1));
  CHECK(full[1] == std::pair<int, int>(0, 2));
  CHECK(full[2] == std::pair<int, int>(1, 2));

  spec.entanglement = Entanglement::linear;
  const auto lin = pairs_of(zz_feature_map(spec, x));
  REQUIRE(lin.size() == 2);
  CHECK(lin[0] == std::pair<int, int>(0, 1));
  CHECK(lin[1] == std::pair<int, int>(1, 2));
}

TEST_CASE("feature map state matches the dense oracle and stays normalized") {
  FeatureMapSpec spec;
  spec.n_qubits = 2;
  spec.depth = 1;
  const std::vector<double> x = {0.8, 2.1};
  const Circuit c = zz_feature_map(spec, x);
  const Statevector got = run_exact(c);
  const Eigen::MatrixXcd u = oracle::dense_unitary(c);
  CHECK(state_diff(got, u.col(0)) <= 1e-10);
  CHECK(std::abs(got.norm() - 1.0) <= 1e-12);

  spec.n_qubits = 4;
  spec.depth = 2;
  const std::vector<double> x4 = {0.1, 0.9, 1.7, 2.9};
  const Statevector s4 = run_exact(zz_feature_map(spec, x4));
  CHECK(std::abs(s4.norm() - 1.0) <= 1e-12);
  CHECK(fidelity(s4, s4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("feature count must equal qubit count") {
  FeatureMapSpec spec;
  spec.n_qubits = 3;
  const std::vector<double> x = {0.1, 0.2};
  CHECK_THROWS_AS((void)zz_feature_map(spec, x), std::invalid_argument);
}

TEST_CASE("ansatz slot layout is layer-major and the count follows the shape") {
  AnsatzSpec spec;
  spec.n_qubits = 3;
  spec.layers = 2;
  CHECK(spec.parameter_count() == 9);
  const Circuit c = real_amplitudes_ansatz(spec);
  CHECK(c.n_slots() == 9);

  // Rotation layers of n RY gates alternate with n-1 entangling gates.
  int slot_cursor = 0;
  std::size_t g = 0;
  for (int layer = 0; layer <= spec.layers; ++layer) {
    for (int q = 0; q < spec.n_qubits; ++q, ++g) {
      REQUIRE(g < c.gates.size());
      CHECK(c.gates[g].kind == GateKind::RY);
      CHECK(c.gates[g].q0 == q);
      CHECK(c.gates[g].slot == slot_cursor++);
    }
    if (layer < spec.layers) {
      for (int q = 0; q + 1 < spec.n_qubits; ++q, ++g) {
        REQUIRE(g < c.gates.size());
        CHECK(c.gates[g].kind == GateKind::CNOT);
        CHECK(c.gates[g].q0 == q);
        CHECK(c.gates[g].q1 == q + 1);
      }
    }
  }
  CHECK(g == c.gates.size());

  for (const std::uint64_t seed : {1u, 2u}) {
    const std::vector<double> theta = random_angles(9, seed);
    const Statevector got = run_exact(c, theta);
    const Eigen::MatrixXcd u = oracle::dense_unitary(c, theta);
    CHECK(state_diff(got, u.col(0)) <= 1e-10);
  }
}

TEST_CASE("all-zero parameters leave the register in the ground state") {
  AnsatzSpec spec;
  spec.n_qubits = 4;
  spec.layers = 3;
  const Circuit c = real_amplitudes_ansatz(spec);
  const std::vector<double> zeros(static_cast<std::size_t>(spec.parameter_count()), 0.0);
  const Statevector s = run_exact(c, zeros);
  CHECK(std::abs(s.amps[0] - std::complex<double>(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("a pi rotation flips a qubit exactly") {
  Circuit c(1);
  c.ry(0, kPi);
  const Statevector s = run_exact(c);
  CHECK(std::abs(s.amps[0]) <= 1e-12);
  CHECK(std::abs(s.amps[1] - std::complex<double>(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("cz entangler option swaps the chain gate kind") {
  AnsatzSpec spec;
  spec.n_qubits = 3;
  spec.layers = 1;
  spec.entangler = Entangler::cz_chain;
  const Circuit c = real_amplitudes_ansatz(spec);
  int n_cz = 0;
  for (const auto& gate : c.gates) {
    CHECK(gate.kind != GateKind::CNOT);
    if (gate.kind == GateKind::CZ) ++n_cz;
  }
  CHECK(n_cz == 2);
}

TEST_CASE("concatenation renumbers the appended circuit's slots") {
  AnsatzSpec spec;
  spec.n_qubits = 2;
  spec.layers = 1;
  const Circuit ansatz = real_amplitudes_ansatz(spec);

  FeatureMapSpec fm;
  fm.n_qubits = 2;
  fm.depth = 1;
  const std::vector<double> x = {0.3, 0.6};
  const Circuit mapped = zz_feature_map(fm, x);

  const Circuit joined = concat(mapped, ansatz);
  CHECK(joined.gates.size() == mapped.gates.size() + ansatz.gates.size());
  CHECK(joined.n_slots() == ansatz.n_slots());

  const std::vector<double> theta = random_angles(ansatz.n_slots(), 5);
  Statevector staged = run_exact(mapped);
  for (const auto& gate : ansatz.gates) {
    GateOp bound = gate;
    if (bound.slot >= 0) {
      bound.angle = theta[static_cast<std::size_t>(bound.slot)];
      bound.slot = -1;
    }
    staged = apply_gate(std::move(staged), bound);
  }
  const Statevector direct = run_exact(joined, theta);
  CHECK(fidelity(staged, direct) == doctest::Approx(1.0).epsilon(1e-12));

  Circuit other(3);
  CHECK_THROWS_AS((void)concat(joined, other), std::invalid_argument);
}

TEST_CASE("feature scaling maps the training range onto the window") {
  Eigen::MatrixXd train(3, 2);
  train << 0.0, 5.0,
           0.5, 5.0,
           1.0, 5.0;
  const auto [scaler, scaled] = scale_features(train);
  CHECK(scaler.lo == 0.0);
  CHECK(scaler.hi == kPi);
  CHECK(scaled(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(scaled(1, 0) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(scaled(2, 0) == doctest::Approx(kPi).epsilon(1e-12));

  // Constant feature lands on the midpoint for every row.
  for (int r = 0; r < 3; ++r)
    CHECK(scaled(r, 1) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("scaler application clips stragglers and preserves order") {
  Eigen::MatrixXd train(4, 1);
  train << 1.0, 2.0, 3.0, 4.0;
  const auto [scaler, scaled] = scale_features(train, 0.0, 1.0);
  (void)scaled;

  Eigen::MatrixXd probe(5, 1);
  probe << 0.0, 1.5, 2.5, 3.5, 9.0;
  const Eigen::MatrixXd mapped = apply_scaler(scaler, probe);
  CHECK(mapped(0, 0) == 0.0);   // below the training range: clipped
  CHECK(mapped(4, 0) == 1.0);   // above: clipped
  for (int r = 0; r + 1 < 5; ++r) CHECK(mapped(r, 0) <= mapped(r + 1, 0));
  CHECK(mapped(1, 0) == doctest::Approx(0.5 / 3.0).epsilon(1e-12));

  Eigen::MatrixXd wrong(2, 3);
  wrong.setZero();
  CHECK_THROWS_AS((void)apply_scaler(scaler, wrong), std::invalid_argument);
}

TEST_CASE("gate listing serializes kinds, wiring and parameters") {
  Circuit c(2);
  c.h(0);
  const int slot = c.add_slot("theta[0]");
  c.ry_slot(1, slot);
  c.cnot(0, 1);
  c.rz(0, 0.25);
  const std::string j = circuit_json(c);
  CHECK(j.find("\"h\"") != std::string::npos);
  CHECK(j.find("\"ry\"") != std::string::npos);
  CHECK(j.find("\"cnot\"") != std::string::npos);
  CHECK(j.find("theta[0]") != std::string::npos);
  CHECK(j.find("0.25") != std::string::npos);
  CHECK(j.back() == '\n');
}
