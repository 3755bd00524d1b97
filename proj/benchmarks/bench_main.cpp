// Microbenchmarks for the hot paths: statevector simulation, sampling,
// fidelity kernels, the derivative-free optimizer and network reduction.
// Run with --benchmark_filter=... to narrow the set.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qbnc/circuits.hpp"
#include "qbnc/kernel_svm.hpp"
#include "qbnc/netdata.hpp"
#include "qbnc/optim.hpp"
#include "qbnc/pca.hpp"
#include "qbnc/qsim.hpp"

namespace {

using namespace qbnc;

Circuit layered_circuit(int n_qubits, int layers, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  Circuit c(n_qubits);
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) {
      c.h(q);
      c.ry(q, angle(gen));
      c.rz(q, angle(gen));
    }
    for (int q = 0; q + 1 < n_qubits; ++q) c.cnot(q, q + 1);
  }
  return c;
}

Eigen::MatrixXd random_features(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> value(0.0, kPi);
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = value(gen);
  return x;
}

void BM_RunExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Circuit c = layered_circuit(n, 4, 99);
  for (auto _ : state) {
    Statevector s = run_exact(c);
    benchmark::DoNotOptimize(s.amps.data());
  }
  state.SetComplexityN(1LL << n);
}
BENCHMARK(BM_RunExact)->DenseRange(4, 16, 4)->Complexity(benchmark::oN);

void BM_SampleNoisy(benchmark::State& state) {
  Circuit ghz(8);
  ghz.h(0);
  for (int q = 0; q + 1 < 8; ++q) ghz.cnot(q, q + 1);
  const NoiseModel noise = NoiseModel::uniform(0.001, 0.01, 0.02, 0.02);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    CountsTable t = sample(ghz, {}, 1024, seed++, noise);
    benchmark::DoNotOptimize(t.counts.size());
  }
}
BENCHMARK(BM_SampleNoisy);

void BM_KernelExactGram(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Eigen::MatrixXd x = random_features(m, 4, 7);
  FeatureMapSpec fmap;
  fmap.n_qubits = 4;
  for (auto _ : state) {
    KernelMatrix k = quantum_kernel_exact(x, x, fmap);
    benchmark::DoNotOptimize(k.values.data());
  }
  state.SetComplexityN(m);
}
BENCHMARK(BM_KernelExactGram)->RangeMultiplier(2)->Range(8, 32)
    ->Complexity(benchmark::oNSquared);

void BM_CobylaSphere(benchmark::State& state) {
  const Objective sphere = [](std::span<const double> v) {
    double s = 0.0;
    for (const double u : v) s += (u - 1.0) * (u - 1.0);
    return s;
  };
  OptimizerConfig cfg;
  cfg.rho_end = 1e-6;
  cfg.max_evals = 500;
  for (auto _ : state) {
    OptimizationResult r = cobyla_minimize(sphere, {4.0, -3.0, 2.0, -1.0}, {}, cfg);
    benchmark::DoNotOptimize(r.f_best);
  }
}
BENCHMARK(BM_CobylaSphere);

void BM_Centrality(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  ConnectivityMatrix m;
  m.weights.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    m.node_names.push_back("node" + std::to_string(i));
    for (int j = i + 1; j < n; ++j) {
      m.weights(i, j) = w(gen);
      m.weights(j, i) = m.weights(i, j);
    }
  }
  for (auto _ : state) {
    Eigen::VectorXd c = eigenvector_centrality(m);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_Centrality)->RangeMultiplier(4)->Range(16, 256);

void BM_PcaFit(benchmark::State& state) {
  std::mt19937_64 gen(29);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd data(48, 64);
  for (int i = 0; i < data.rows(); ++i)
    for (int j = 0; j < data.cols(); ++j) data(i, j) = g(gen);
  for (auto _ : state) {
    PcaModel m = pca_fit(data, 8);
    benchmark::DoNotOptimize(m.components.data());
  }
}
BENCHMARK(BM_PcaFit);

}  // namespace

BENCHMARK_MAIN();
