#include "core/eds.hpp"

#include <Eigen/Eigenvalues>

#include "core/subspace.hpp"

namespace glg {

EigSystem eig_sym_descending(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  require(es.info() == Eigen::Success, ErrorKind::internal, "eigendecomposition failed");
  EigSystem sys;
  sys.eigvals = es.eigenvalues().reverse();
  sys.eigvecs = es.eigenvectors().rowwise().reverse();
  sign_normalize_columns(sys.eigvecs);
  return sys;
}

Mat dxxt_dx(const Mat& X, Eigen::Index a, Eigen::Index b) {
  const Eigen::Index n = X.rows();
  require(a >= 0 && a < n, ErrorKind::index_range, "dxxt_dx: row index out of range");
  require(b >= 0 && b < X.cols(), ErrorKind::index_range, "dxxt_dx: column index out of range");
  Mat D = Mat::Zero(n, n);
  D.col(a) += X.col(b);
  D.row(a) += X.col(b).transpose();
  return D;
}

EigDerivative eig_derivative(const Mat& X, Eigen::Index i, Eigen::Index a, Eigen::Index b) {
  const Eigen::Index n = X.rows();
  require(i >= 0 && i < n, ErrorKind::index_range, "eig_derivative: eigenpair index out of range");

  const EigSystem sys = eig_sym_descending(X * X.transpose());
  const double lambda = sys.eigvals(i);

  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != i) gap = std::min(gap, std::abs(sys.eigvals(j) - lambda));
  require(n == 1 || gap > 1e-8, ErrorKind::degenerate,
          "eig_derivative: eigenvalue " + std::to_string(i) +
              " is not isolated (gap " + std::to_string(gap) + ")");

  const Vec y = sys.eigvecs.col(i);
  const Vec v = dxxt_dx(X, a, b) * y;

  EigDerivative out;
  out.d_eigval = y.dot(v);

  // Moore-Penrose pseudoinverse of (X X^T - lambda I) applied to v, assembled
  // from the full spectrum; directions within the cutoff of lambda are dropped.
  const double cutoff = 1e-10 * std::max(std::abs(sys.eigvals(0)),
                                         std::abs(sys.eigvals(n - 1)));
  out.d_eigvec = Vec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diff = sys.eigvals(j) - lambda;
    if (std::abs(diff) <= cutoff) continue;
    out.d_eigvec -= (sys.eigvecs.col(j).dot(v) / diff) * sys.eigvecs.col(j);
  }
  return out;
}

double fd_check_eig(const Mat& X, Eigen::Index i, double step) {
  require(step > 0.0, ErrorKind::invalid_arg, "fd_check_eig: step must be positive");
  const Eigen::Index n = X.rows();
  const EigSystem base = eig_sym_descending(X * X.transpose());
  Eigen::Index anchor = 0;
  base.eigvecs.col(i).cwiseAbs().maxCoeff(&anchor);
  const double anchor_sign = base.eigvecs(anchor, i) >= 0.0 ? 1.0 : -1.0;

  auto aligned_eig = [&](const Mat& Xp, Vec& yv, double& lv) {
    const EigSystem sys = eig_sym_descending(Xp * Xp.transpose());
    lv = sys.eigvals(i);
    yv = sys.eigvecs.col(i);
    if (yv(anchor) * anchor_sign < 0.0) yv = -yv;
  };

  double worst = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < X.cols(); ++b) {
      const EigDerivative an = eig_derivative(X, i, a, b);
      Mat Xp = X, Xm = X;
      Xp(a, b) += step;
      Xm(a, b) -= step;
      Vec yp, ym;
      double lp, lm;
      aligned_eig(Xp, yp, lp);
      aligned_eig(Xm, ym, lm);
      const double fd_val = (lp - lm) / (2.0 * step);
      const Vec fd_vec = (yp - ym) / (2.0 * step);
      const double rel_val =
          std::abs(an.d_eigval - fd_val) / std::max(std::abs(fd_val), 1e-10);
      const double rel_vec = (an.d_eigvec - fd_vec).norm() / std::max(fd_vec.norm(), 1e-10);
      worst = std::max(worst, std::max(rel_val, rel_vec));
    }
  }
  return worst;
}

}  // namespace glg
