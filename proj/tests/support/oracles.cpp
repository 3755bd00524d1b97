#include "support/oracles.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace qbnc::oracle {

namespace {

using Mat2 = Eigen::Matrix2cd;
using cplx = std::complex<double>;

Mat2 gate_matrix(GateKind kind, double angle) {
  const cplx i(0.0, 1.0);
  Mat2 m;
  switch (kind) {
    case GateKind::H:
      m << 1, 1, 1, -1;
      return m / std::sqrt(2.0);
    case GateKind::X:
      m << 0, 1, 1, 0;
      return m;
    case GateKind::Y:
      m << 0, -i, i, 0;
      return m;
    case GateKind::Z:
      m << 1, 0, 0, -1;
      return m;
    case GateKind::RY:
      m << std::cos(angle / 2), -std::sin(angle / 2), std::sin(angle / 2),
          std::cos(angle / 2);
      return m;
    case GateKind::RZ:
      m << std::exp(-i * angle / 2.0), 0, 0, std::exp(i * angle / 2.0);
      return m;
    case GateKind::P:
      m << 1, 0, 0, std::exp(i * angle);
      return m;
    default:
      throw std::logic_error("gate_matrix: two-qubit kind");
  }
}

// Kronecker chain with chosen 2x2 factors at given qubits, identity
// elsewhere. Qubit q contributes weight 2^q to the amplitude index, so the
// chain multiplies highest qubit first.
Eigen::MatrixXcd place(int n, const std::map<int, Mat2>& at) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    const Mat2 f = at.count(q) ? at.at(q) : Mat2::Identity();
    m = Eigen::kroneckerProduct(m, f).eval();
  }
  return m;
}

Eigen::MatrixXcd full_gate(int n, const GateOp& g, double angle) {
  if (!g.two_qubit()) return place(n, {{g.q0, gate_matrix(g.kind, angle)}});
  Mat2 p0, p1, tgt;
  p0 << 1, 0, 0, 0;
  p1 << 0, 0, 0, 1;
  tgt = gate_matrix(g.kind == GateKind::CNOT ? GateKind::X : GateKind::Z, 0.0);
  return place(n, {{g.q0, p0}}) + place(n, {{g.q0, p1}, {g.q1, tgt}});
}

}  // namespace

Eigen::MatrixXcd dense_unitary(const Circuit& c, std::span<const double> params) {
  const auto dim = static_cast<Eigen::Index>(1) << c.n_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const GateOp& g : c.gates) {
    const double angle =
        g.slot >= 0 ? params[static_cast<std::size_t>(g.slot)] : g.angle;
    u = (full_gate(c.n_qubits, g, angle) * u).eval();
  }
  return u;
}

Eigen::VectorXcd dense_state(const Circuit& c, std::span<const double> params) {
  return dense_unitary(c, params).col(0);
}

EigenSym eigen_sym_desc(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen_sym_desc: solver failed");
  const Eigen::Index n = a.rows();
  EigenSym out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values[j] = solver.eigenvalues()[n - 1 - j];
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  return out;
}

double dual_objective(const Eigen::MatrixXd& k, const std::vector<int>& y,
                      const Eigen::VectorXd& alpha) {
  const Eigen::Index m = k.rows();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      quad += alpha[i] * alpha[j] * y[static_cast<std::size_t>(i)] *
              y[static_cast<std::size_t>(j)] * k(i, j);
  return alpha.sum() - 0.5 * quad;
}

namespace {

// Euclidean projection onto {0 <= a <= c} intersected with {y'a = 0}:
// a_i(t) = clip(v_i - t y_i), with sum y_i a_i(t) nonincreasing in t.
Eigen::VectorXd project_dual(const Eigen::VectorXd& v, const std::vector<int>& y,
                             double c) {
  const Eigen::Index m = v.size();
  auto value = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      s += y[static_cast<std::size_t>(i)] *
           std::clamp(v[i] - t * y[static_cast<std::size_t>(i)], 0.0, c);
    return s;
  };
  double lo = -(v.cwiseAbs().maxCoeff() + c + 1.0);
  double hi = -lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i)
    out[i] = std::clamp(v[i] - t * y[static_cast<std::size_t>(i)], 0.0, c);
  return out;
}

}  // namespace

DualReference svm_dual_reference(const Eigen::MatrixXd& k,
                                 const std::vector<int>& y, double c) {
  const Eigen::Index m = k.rows();
  Eigen::MatrixXd q(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      q(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] *
                k(i, j);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  double best = dual_objective(k, y, alpha);
  double step = 1.0;
  for (int it = 0; it < 500000 && step > 1e-14; ++it) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(m) - q * alpha;
    const Eigen::VectorXd cand = project_dual(alpha + step * grad, y, c);
    const double obj = dual_objective(k, y, cand);
    if (obj > best + 1e-15) {
      alpha = cand;
      best = obj;
      step *= 1.2;
    } else {
      step *= 0.5;
    }
  }
  return {alpha, best};
}

DualReference svm_dual_grid4(const Eigen::MatrixXd& k, const std::vector<int>& y,
                             double c, int steps) {
  if (k.rows() != 4) throw std::invalid_argument("svm_dual_grid4: m must be 4");
  const double h = c / steps;
  DualReference ref;
  ref.alpha = Eigen::VectorXd::Zero(4);
  ref.objective = -1e300;
  Eigen::VectorXd a(4);
  for (int i0 = 0; i0 <= steps; ++i0)
    for (int i1 = 0; i1 <= steps; ++i1)
      for (int i2 = 0; i2 <= steps; ++i2)
        for (int i3 = 0; i3 <= steps; ++i3) {
          a << i0 * h, i1 * h, i2 * h, i3 * h;
          double bal = 0.0;
          for (int t = 0; t < 4; ++t) bal += y[static_cast<std::size_t>(t)] * a[t];
          if (std::abs(bal) > 1e-12) continue;
          const double obj = dual_objective(k, y, a);
          if (obj > ref.objective) {
            ref.objective = obj;
            ref.alpha = a;
          }
        }
  return ref;
}

double auc_pairwise(const std::vector<int>& y_true, const Eigen::VectorXd& scores) {
  double favorable = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 1) continue;
    for (std::size_t j = 0; j < y_true.size(); ++j) {
      if (y_true[j] != 0) continue;
      ++pairs;
      const double d = scores[static_cast<Eigen::Index>(i)] -
                       scores[static_cast<Eigen::Index>(j)];
      if (d > 0.0)
        favorable += 1.0;
      else if (d == 0.0)
        favorable += 0.5;
    }
  }
  if (pairs == 0) throw std::invalid_argument("auc_pairwise: need both classes");
  return favorable / static_cast<double>(pairs);
}

double u_pair_count(std::span<const double> xs, std::span<const double> ys) {
  double u = 0.0;
  for (const double x : xs)
    for (const double y : ys) {
      if (x > y)
        u += 1.0;
      else if (x == y)
        u += 0.5;
    }
  return u;
}

double mw_exact_p(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const std::size_t nx = xs.size(), n = pooled.size();

  const double ux = u_pair_count(xs, ys);
  const double uy = u_pair_count(ys, xs);
  const double u_obs = std::min(ux, uy);

  // mask sorted ascending: 0 marks an X slot. next_permutation walks every
  // distinct assignment of nx X-slots among n.
  std::vector<int> mask(n, 1);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(nx), 0);
  std::sort(mask.begin(), mask.end());

  long total = 0, tail = 0;
  std::vector<double> gx, gy;
  do {
    gx.clear();
    gy.clear();
    for (std::size_t i = 0; i < n; ++i)
      (mask[i] == 0 ? gx : gy).push_back(pooled[i]);
    const double u = u_pair_count(gx, gy);
    ++total;
    if (u <= u_obs + 1e-12) ++tail;
  } while (std::next_permutation(mask.begin(), mask.end()));

  // Parenthesized ratio-first so the float expression is order-identical to
  // a "double the tail probability" formulation; keeps == comparisons fair.
  return std::min(1.0, 2.0 * (static_cast<double>(tail) / static_cast<double>(total)));
}

double mw_normal_p(std::span<const double> xs, std::span<const double> ys) {
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double n = nx + ny;

  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  std::sort(pooled.begin(), pooled.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double u = std::min(u_pair_count(xs, ys), u_pair_count(ys, xs));
  const double mu = nx * ny / 2.0;
  const double var = (nx * ny / 12.0) * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::min(0.0, (u - mu + 0.5) / std::sqrt(var));
  return std::min(1.0, 2.0 * 0.5 * std::erfc(-z / std::sqrt(2.0)));
}

Circuit random_circuit(int n_qubits, int n_gates, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto pick = [&](int bound) {
    return static_cast<int>(gen() % static_cast<std::uint64_t>(bound));
  };
  const auto angle = [&] {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * 3.14159265358979323846;
  };

  Circuit c(n_qubits);
  const int n_kinds = n_qubits >= 2 ? 9 : 7;
  for (int g = 0; g < n_gates; ++g) {
    const auto kind = static_cast<GateKind>(pick(n_kinds));
    const int q0 = pick(n_qubits);
    switch (kind) {
      case GateKind::H: c.h(q0); break;
      case GateKind::X: c.x(q0); break;
      case GateKind::Y: c.y(q0); break;
      case GateKind::Z: c.z(q0); break;
      case GateKind::RY: c.ry(q0, angle()); break;
      case GateKind::RZ: c.rz(q0, angle()); break;
      case GateKind::P: c.p(q0, angle()); break;
      case GateKind::CNOT:
      case GateKind::CZ: {
        int q1 = pick(n_qubits - 1);
        if (q1 >= q0) ++q1;
        if (kind == GateKind::CNOT) c.cnot(q0, q1);
        else c.cz(q0, q1);
        break;
      }
    }
  }
  return c;
}

}  // namespace qbnc::oracle
