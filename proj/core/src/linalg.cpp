#include "qbnc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qbnc {

namespace {

double offdiag_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigensolve(const Eigen::MatrixXd& a_in, double tol,
                                 int max_sweeps) {
  if (a_in.rows() != a_in.cols())
    throw std::invalid_argument("jacobi_eigensolve: matrix must be square");
  const int n = static_cast<int>(a_in.rows());
  Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());  // enforce symmetry
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // smaller-angle root of t^2 + 2*theta*t - 1 = 0
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::VectorXd ap = a.col(p), aq = a.col(q);
        a.col(p) = c * ap - s * aq;
        a.col(q) = s * ap + c * aq;
        ap = a.row(p).transpose();
        aq = a.row(q).transpose();
        a.row(p) = (c * ap - s * aq).transpose();
        a.row(q) = (s * ap + c * aq).transpose();
        const Eigen::VectorXd vp = v.col(p), vq = v.col(q);
        v.col(p) = c * vp - s * vq;
        v.col(q) = s * vp + c * vq;
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd diag = a.diagonal();
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return diag[i] > diag[j]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = diag[order[j]];
    out.vectors.col(j) = v.col(order[j]);
  }
  return out;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("project_to_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

}  // namespace qbnc
