// Small dense linear-algebra kernels: a cyclic Jacobi eigensolver for 4x4
// symmetric matrices and a scaling-and-squaring matrix exponential.
#pragma once

#include <utility>

#include "ttrack/types.hpp"

namespace ttrack {

struct Sym4Eigen {
  Vec4 eigenvalues;  // descending
  Mat4 eigenvectors; // columns, matching eigenvalue order
};

// Full eigendecomposition by cyclic Jacobi rotations. The input is scaled
// by its Frobenius norm before sweeping so the stopping threshold
// (off-diagonal Frobenius norm < 1e-13) is scale-invariant.
Sym4Eigen jacobi_eigen_sym4(const Mat4& w);

// Largest eigenvalue and its unit eigenvector. Throws on asymmetric input
// (|w - w^T| beyond 1e-9 relative).
std::pair<double, Vec4> max_eigenvector_sym4(const Mat4& w);

// exp(a) by [6/6] Pade approximation with scaling and squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

}  // namespace ttrack
