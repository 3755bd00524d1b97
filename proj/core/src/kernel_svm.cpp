#include "qbnc/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qbnc/linalg.hpp"
#include "qbnc/rng.hpp"

namespace qbnc {

namespace {

void check_features(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const FeatureMapSpec& fmap, const char* who) {
  if (a.rows() < 1 || b.rows() < 1)
    throw std::invalid_argument(std::string(who) + ": empty input");
  if (a.cols() != fmap.n_qubits || b.cols() != fmap.n_qubits)
    throw std::invalid_argument(std::string(who) +
                                ": feature count does not match the map");
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument(std::string(who) + ": non-finite features");
}

std::vector<Statevector> feature_states(const Eigen::MatrixXd& rows,
                                        const FeatureMapSpec& fmap) {
  std::vector<Statevector> states;
  states.reserve(rows.rows());
  std::vector<double> x(rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) x[j] = rows(i, j);
    states.push_back(run_exact(zz_feature_map(fmap, x)));
  }
  return states;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

// All-zeros outcome frequency of U_phi(b_row)^dag U_phi(a_row) |0>.
double sampled_entry(const Eigen::MatrixXd& a, Eigen::Index i,
                     const Eigen::MatrixXd& b, Eigen::Index j,
                     const FeatureMapSpec& fmap, std::uint64_t shots,
                     std::uint64_t seed) {
  std::vector<double> xi(a.cols()), xj(b.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) xi[c] = a(i, c);
  for (Eigen::Index c = 0; c < b.cols(); ++c) xj[c] = b(j, c);
  Circuit forward = zz_feature_map(fmap, xi);
  const Circuit backward = inverse(zz_feature_map(fmap, xj));
  for (const GateOp& g : backward.gates) forward.gates.push_back(g);

  const CountsTable counts =
      sample(forward, {}, shots,
             mix_seed(seed, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(j)));
  const std::string zeros(fmap.n_qubits, '0');
  const auto it = counts.counts.find(zeros);
  const std::uint64_t hits = (it == counts.counts.end()) ? 0 : it->second;
  return static_cast<double>(hits) / static_cast<double>(shots);
}

}  // namespace

KernelMatrix quantum_kernel_exact(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b,
                                  const FeatureMapSpec& fmap) {
  check_features(a, b, fmap, "quantum_kernel_exact");
  KernelMatrix k;
  k.values.resize(a.rows(), b.rows());

  const std::vector<Statevector> sa = feature_states(a, fmap);
  if (same_matrix(a, b)) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k.values(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
        const double f = std::clamp(fidelity(sa[i], sa[j]), 0.0, 1.0);
        k.values(i, j) = f;
        k.values(j, i) = f;
      }
    }
    return k;
  }

  const std::vector<Statevector> sb = feature_states(b, fmap);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k.values(i, j) = std::clamp(fidelity(sa[i], sb[j]), 0.0, 1.0);
  return k;
}

KernelMatrix quantum_kernel_sampled(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b,
                                    const FeatureMapSpec& fmap,
                                    std::uint64_t shots, std::uint64_t seed) {
  check_features(a, b, fmap, "quantum_kernel_sampled");
  if (shots < 1)
    throw std::invalid_argument("quantum_kernel_sampled: shots must be >= 1");

  KernelMatrix k;
  k.values.resize(a.rows(), b.rows());
  if (same_matrix(a, b)) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k.values(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
        const double fij = sampled_entry(a, i, b, j, fmap, shots, seed);
        const double fji = sampled_entry(a, j, b, i, fmap, shots, seed);
        const double avg = 0.5 * (fij + fji);
        k.values(i, j) = avg;
        k.values(j, i) = avg;
      }
    }
    return k;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k.values(i, j) = sampled_entry(a, i, b, j, fmap, shots, seed);
  return k;
}

KernelMatrix classical_kernel(KernelKind kind, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b, double gamma) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("classical_kernel: dimension mismatch");
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("classical_kernel: non-finite features");
  KernelMatrix k;
  if (kind == KernelKind::linear) {
    k.values = a * b.transpose();
    return k;
  }
  if (!(gamma > 0.0))
    throw std::invalid_argument("classical_kernel: rbf gamma must be > 0");
  k.values.resize(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k.values(i, j) =
          std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
  return k;
}

double rbf_gamma_scale(const Eigen::MatrixXd& x) {
  if (x.size() == 0)
    throw std::invalid_argument("rbf_gamma_scale: empty matrix");
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / x.size();
  const double d = static_cast<double>(x.cols());
  if (var <= 0.0) return 1.0 / d;
  return 1.0 / (d * var);
}

SvmModel svm_fit(const KernelMatrix& kin, const std::vector<int>& y, double C) {
  const Eigen::Index m = kin.values.rows();
  if (m < 2 || kin.values.cols() != m)
    throw std::invalid_argument("svm_fit: kernel must be square with m >= 2");
  if (static_cast<Eigen::Index>(y.size()) != m)
    throw std::invalid_argument("svm_fit: label count mismatch");
  if (!(C > 0.0)) throw std::invalid_argument("svm_fit: C must be > 0");
  bool has_pos = false, has_neg = false;
  for (const int yi : y) {
    if (yi == 1)
      has_pos = true;
    else if (yi == -1)
      has_neg = true;
    else
      throw std::invalid_argument("svm_fit: labels must be -1 or +1");
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("svm_fit: both classes required");
  if (!kin.values.allFinite())
    throw std::invalid_argument("svm_fit: non-finite kernel");

  Eigen::MatrixXd k = 0.5 * (kin.values + kin.values.transpose());

  SvmModel model;
  model.C = C;
  model.y = y;

  // Shot-sampled kernels can dip below PSD; repair by zeroing negative
  // eigenvalues when the dip exceeds the exact-mode tolerance.
  {
    const SymmetricEigen eig = jacobi_eigensolve(k);
    const double min_eig = eig.values.minCoeff();
    if (min_eig < -1e-8) {
      model.psd_clip = -min_eig;
      Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
      k = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
      k = 0.5 * (k + k.transpose());
    }
  }

  std::vector<double> alpha(m, 0.0), grad(m, -1.0);
  const double stop_gap = 1e-9;
  const long max_updates = 200000L + 2000L * static_cast<long>(m);
  long updates = 0;

  auto in_up = [&](Eigen::Index t) {
    return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
  };

  for (;;) {
    Eigen::Index i = -1, j = -1;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > up_max) {
        up_max = v;
        i = t;
      }
      if (in_low(t) && v < low_min) {
        low_min = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || up_max - low_min <= stop_gap) break;
    if (++updates > max_updates)
      throw std::runtime_error("svm_fit: pairwise optimization did not converge");

    // Move along alpha_i += y_i*delta, alpha_j -= y_j*delta; the curvature
    // along that direction is K_ii + K_jj - 2 K_ij >= 0 for a PSD kernel.
    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = 1e-12;
    double delta = (up_max - low_min) / a;

    const double room_i = (y[i] == 1) ? (C - alpha[i]) : alpha[i];
    const double room_j = (y[j] == 1) ? alpha[j] : (C - alpha[j]);
    delta = std::min(delta, std::min(room_i, room_j));

    // Land exactly on a bound that the step reaches, so the up/low set
    // membership of the variable flips cleanly instead of stalling a few
    // ulp away from the box edge.
    const bool hit_i = delta == room_i;
    const bool hit_j = delta == room_j;
    alpha[i] += y[i] * delta;
    alpha[j] -= y[j] * delta;
    if (hit_i) alpha[i] = (y[i] == 1) ? C : 0.0;
    if (hit_j) alpha[j] = (y[j] == 1) ? 0.0 : C;

    const double di = y[i] * delta, dj = -y[j] * delta;
    for (Eigen::Index t = 0; t < m; ++t)
      grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
  }
  model.n_updates = updates;
  model.alpha = alpha;

  // b: mean of -y_t * grad_t over free support vectors, else the midpoint
  // of the feasible interval [max over up set, min over low set].
  double sum_b = 0.0;
  int n_free = 0;
  const double edge = 1e-8 * C;
  for (Eigen::Index t = 0; t < m; ++t) {
    if (alpha[t] > edge && alpha[t] < C - edge) {
      sum_b += -y[t] * grad[t];
      ++n_free;
    }
  }
  if (n_free > 0) {
    model.bias = sum_b / n_free;
  } else {
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t)) up_max = std::max(up_max, v);
      if (in_low(t)) low_min = std::min(low_min, v);
    }
    model.bias = 0.5 * (up_max + low_min);
  }

  for (Eigen::Index t = 0; t < m; ++t)
    if (alpha[t] > 1e-12) model.support.push_back(static_cast<int>(t));
  return model;
}

double svm_decision(const SvmModel& model, std::span<const double> k_row) {
  if (k_row.size() != model.alpha.size())
    throw std::invalid_argument("svm_decision: kernel row length mismatch");
  double score = model.bias;
  for (std::size_t t = 0; t < model.alpha.size(); ++t)
    score += model.alpha[t] * model.y[t] * k_row[t];
  return score;
}

int svm_classify(const SvmModel& model, std::span<const double> k_row) {
  return svm_decision(model, k_row) >= 0.0 ? 1 : -1;
}

void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& k) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_kernel_csv: cannot open " + path.string());
  const Eigen::Index rows = k.values.rows(), cols = k.values.cols();
  auto row_id = [&](Eigen::Index i) {
    return i < static_cast<Eigen::Index>(k.row_ids.size()) ? k.row_ids[i]
                                                           : std::to_string(i);
  };
  auto col_id = [&](Eigen::Index j) {
    return j < static_cast<Eigen::Index>(k.col_ids.size()) ? k.col_ids[j]
                                                           : std::to_string(j);
  };
  out << "id";
  for (Eigen::Index j = 0; j < cols; ++j) out << ',' << col_id(j);
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < rows; ++i) {
    out << row_id(i);
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", k.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_kernel_csv: write failed");
}

}  // namespace qbnc
