#include "core/subspace.hpp"

#include <Eigen/SVD>

namespace glg {

void sign_normalize_columns(Mat& M) {
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const double a = std::abs(M(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (M(arg, j) < 0.0) M.col(j) = -M.col(j);
  }
}

SubspaceBasis span_basis(const Mat& X, Eigen::Index k, std::vector<std::string>* warnings) {
  const Eigen::Index n = X.rows();
  require(n > 0 && X.cols() > 0, ErrorKind::invalid_arg, "span_basis: empty matrix");
  require(k >= 1, ErrorKind::index_range, "span_basis: k must be at least 1");
  require(k <= n, ErrorKind::index_range,
          "span_basis: k exceeds the ambient dimension " + std::to_string(n));

  const bool need_full = k > std::min(n, X.cols());
  Eigen::BDCSVD<Mat> svd(X, need_full ? Eigen::ComputeFullU : Eigen::ComputeThinU);
  const Vec& sigma = svd.singularValues();

  const double tol = sigma.size() > 0 ? sigma(0) * 1e-10 : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol) ++rank;
  if (rank < k && warnings != nullptr) {
    warnings->push_back("span_basis: numerical rank " + std::to_string(rank) +
                        " below requested dimension " + std::to_string(k) +
                        "; basis completed from the null space");
  }

  SubspaceBasis out;
  out.basis = svd.matrixU().leftCols(k);
  sign_normalize_columns(out.basis);
  return out;
}

Vec principal_cosines(const SubspaceBasis& A, const SubspaceBasis& B) {
  require(A.ambient_dim() == B.ambient_dim(), ErrorKind::dim_mismatch,
          "principal_cosines: ambient dimensions differ (" + std::to_string(A.ambient_dim()) +
              " vs " + std::to_string(B.ambient_dim()) + ")");
  Mat M = A.basis.transpose() * B.basis;
  Eigen::JacobiSVD<Mat> svd(M);
  Vec c = svd.singularValues();
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = std::clamp(c(i), 0.0, 1.0);
  return c;
}

Vec domain_distance(const Mat& Xs, const Mat& Xt, std::vector<std::string>* warnings) {
  require(Xs.rows() == Xt.rows(), ErrorKind::dim_mismatch,
          "domain_distance: instance counts differ (" + std::to_string(Xs.rows()) + " vs " +
              std::to_string(Xt.rows()) + ")");
  const Eigen::Index ks = std::min(Xs.rows(), Xs.cols());
  const Eigen::Index kt = std::min(Xt.rows(), Xt.cols());
  SubspaceBasis A = span_basis(Xs, ks, warnings);
  SubspaceBasis B = span_basis(Xt, kt, warnings);
  return principal_cosines(A, B);
}

double pair_metric(const Vec& d1, const Vec& d2) {
  require(d1.size() == d2.size(), ErrorKind::dim_mismatch,
          "pair_metric: vector lengths differ (" + std::to_string(d1.size()) + " vs " +
              std::to_string(d2.size()) + ")");
  return (d1 - d2).cwiseAbs().sum();
}

}  // namespace glg
