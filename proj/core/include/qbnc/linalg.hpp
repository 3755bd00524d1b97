#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qbnc {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column j pairs with values[j]; orthonormal
};

// Full eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// Deterministic sweep order (upper triangle, row major); converges when the
// off-diagonal Frobenius norm falls below tol * ||A||_F.
SymmetricEigen jacobi_eigensolve(const Eigen::MatrixXd& a, double tol = 1e-14,
                                 int max_sweeps = 100);

// Euclidean projection of v onto the probability simplex
// { p : p_i >= 0, sum p_i = 1 }.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace qbnc
