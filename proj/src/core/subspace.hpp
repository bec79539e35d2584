#pragma once

#include "core/common.hpp"

namespace glg {

// N×k orthonormal basis of a k-dimensional subspace of R^N.
struct SubspaceBasis {
  Mat basis;
  Eigen::Index ambient_dim() const { return basis.rows(); }
  Eigen::Index dim() const { return basis.cols(); }
};

// Flips column signs so the entry of largest magnitude in each column is positive.
void sign_normalize_columns(Mat& M);

// Top-k eigenvectors of X·X^T (equivalently the left singular vectors of X),
// orthonormal and sign-normalized. If the numerical rank of X is below k the
// basis is completed from the zero eigenspace and a warning is recorded.
SubspaceBasis span_basis(const Mat& X, Eigen::Index k, std::vector<std::string>* warnings = nullptr);

// Cosines of the principal angles between two subspaces: the singular values
// of A^T B, descending, clamped into [0, 1]. Length min(dim A, dim B).
Vec principal_cosines(const SubspaceBasis& A, const SubspaceBasis& B);

// Heterogeneous distance vector D_He: principal cosines between the spans of
// two data matrices sharing an instance count.
Vec domain_distance(const Mat& Xs, const Mat& Xt, std::vector<std::string>* warnings = nullptr);

// l1 distance between two equally long distance vectors.
double pair_metric(const Vec& d1, const Vec& d2);

}  // namespace glg
