#pragma once

#include "core/common.hpp"

namespace glg {

// Derivative of one eigenpair of X·X^T with respect to a single entry of X.
struct EigDerivative {
  Vec d_eigvec;    // length N
  double d_eigval = 0.0;
};

// Eigendecomposition of X·X^T with eigenvalues descending and eigenvectors
// sign-normalized (largest-magnitude entry positive).
struct EigSystem {
  Vec eigvals;   // length N, descending
  Mat eigvecs;   // N×N, column i pairs with eigvals(i)
};

EigSystem eig_sym_descending(const Mat& S);

// d(X·X^T)/dX_ab as a dense N×N matrix: e_a x_b^T + x_b e_a^T.
Mat dxxt_dx(const Mat& X, Eigen::Index a, Eigen::Index b);

// Analytic derivative of the i-th eigenpair of X·X^T in entry (a, b) of X.
// Requires the i-th eigenvalue to be simple: its gap to every other
// eigenvalue (zero included) must exceed 1e-8, else a degenerate error.
EigDerivative eig_derivative(const Mat& X, Eigen::Index i, Eigen::Index a, Eigen::Index b);

// Central-difference validation of eig_derivative over every entry (a, b).
// Returns the largest relative error across entries, eigenvalue and
// eigenvector derivatives both.
double fd_check_eig(const Mat& X, Eigen::Index i, double step);

}  // namespace glg
