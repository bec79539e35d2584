#include "core/gfk.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "core/eds.hpp"
#include "core/subspace.hpp"

namespace glg {

namespace {

// All principal directions of a domain, split into the leading d and the
// trailing complement.
struct PcaSplit {
  Mat P;  // r×d
  Mat R;  // r×(r-d)
};

PcaSplit pca_split(const Mat& X, Eigen::Index d, const char* which) {
  const Eigen::Index n = X.rows();
  const Eigen::Index r = X.cols();
  require(n >= 2, ErrorKind::invalid_arg,
          std::string("gfk_kernel: ") + which + " needs at least two instances");
  const Mat cov = X.transpose() * X / double(n - 1);
  EigSystem sys = eig_sym_descending(cov);
  Eigen::Index rank = 0;
  const double tol = std::max(sys.eigvals(0), 0.0) * 1e-10;
  for (Eigen::Index i = 0; i < r; ++i)
    if (sys.eigvals(i) > tol) ++rank;
  require(rank >= d, ErrorKind::degenerate,
          std::string("gfk_kernel: ") + which + " covariance rank " + std::to_string(rank) +
              " below subspace dimension " + std::to_string(d));
  PcaSplit out;
  out.P = sys.eigvecs.leftCols(d);
  out.R = sys.eigvecs.rightCols(r - d);
  return out;
}

struct FlowParts {
  Mat omega1;  // r×d, Ps·U1
  Mat omega2;  // r×d, Rs·U2
  Vec theta;   // principal angles, length d
};

FlowParts flow_parts(const Mat& Xs, const Mat& Xt, Eigen::Index d) {
  require(Xs.cols() == Xt.cols(), ErrorKind::dim_mismatch,
          "gfk_kernel: feature counts differ (" + std::to_string(Xs.cols()) + " vs " +
              std::to_string(Xt.cols()) + ")");
  const Eigen::Index r = Xs.cols();
  require(d >= 1, ErrorKind::invalid_arg, "gfk_kernel: d must be at least 1");
  require(2 * d <= r, ErrorKind::invalid_arg,
          "gfk_kernel: d = " + std::to_string(d) + " too large for feature count " +
              std::to_string(r) + " (need 2d <= r)");

  const PcaSplit src = pca_split(Xs, d, "source");
  const PcaSplit tgt = pca_split(Xt, d, "target");

  Eigen::JacobiSVD<Mat> svd(src.P.transpose() * tgt.P, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat U1 = svd.matrixU();
  Vec gamma = svd.singularValues();
  for (Eigen::Index i = 0; i < d; ++i) gamma(i) = std::clamp(gamma(i), 0.0, 1.0);

  const Mat QV = src.R.transpose() * tgt.P * svd.matrixV();
  Mat U2 = Mat::Zero(r - d, d);
  FlowParts out;
  out.theta = Vec::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sigma = QV.col(i).norm();
    if (sigma > 1e-12) U2.col(i) = -QV.col(i) / sigma;
    out.theta(i) = std::atan2(sigma, gamma(i));
  }
  out.omega1 = src.P * U1;
  out.omega2 = src.R * U2;
  return out;
}

// Diagonal weights of the integrated flow. Near theta = 0 the closed forms
// are 0/0, so a truncated series takes over below 1e-4.
void flow_weights(const Vec& theta, Vec& l1, Vec& l2, Vec& l3) {
  const Eigen::Index d = theta.size();
  l1.resize(d);
  l2.resize(d);
  l3.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = theta(i);
    if (t > 1e-4) {
      l1(i) = 0.5 + std::sin(2.0 * t) / (4.0 * t);
      l2(i) = (1.0 - std::cos(2.0 * t)) / (4.0 * t);
      l3(i) = 0.5 - std::sin(2.0 * t) / (4.0 * t);
    } else {
      const double t2 = t * t;
      l1(i) = 1.0 - t2 / 3.0 + 2.0 * t2 * t2 / 15.0;
      l2(i) = t / 2.0 - t * t2 / 6.0;
      l3(i) = t2 / 3.0 - 2.0 * t2 * t2 / 15.0;
    }
  }
}

}  // namespace

GfkKernel gfk_kernel(const Mat& Xs, const Mat& Xt, Eigen::Index d) {
  const FlowParts fp = flow_parts(Xs, Xt, d);
  Vec l1, l2, l3;
  flow_weights(fp.theta, l1, l2, l3);
  Mat G = fp.omega1 * l1.asDiagonal() * fp.omega1.transpose() -
          fp.omega1 * l2.asDiagonal() * fp.omega2.transpose() -
          fp.omega2 * l2.asDiagonal() * fp.omega1.transpose() +
          fp.omega2 * l3.asDiagonal() * fp.omega2.transpose();
  G = ((G + G.transpose()) / 2.0).eval();
  return GfkKernel{std::move(G), d};
}

Mat gfk_embed(const Mat& X, const GfkKernel& kernel) {
  require(X.cols() == kernel.G.rows(), ErrorKind::dim_mismatch,
          "gfk_embed: feature count " + std::to_string(X.cols()) +
              " does not match kernel size " + std::to_string(kernel.G.rows()));
  EigSystem sys = eig_sym_descending(kernel.G);
  const double floor_ok = -1e-8 * std::max(1.0, std::abs(sys.eigvals(0)));
  require(sys.eigvals.minCoeff() >= floor_ok, ErrorKind::not_psd,
          "gfk_embed: kernel has a significantly negative eigenvalue " +
              std::to_string(sys.eigvals.minCoeff()));
  Vec root = sys.eigvals.cwiseMax(0.0).cwiseSqrt();
  Mat L = sys.eigvecs * root.asDiagonal() * sys.eigvecs.transpose();
  return X * L;
}

Mat gfk_kernel_quadrature(const Mat& Xs, const Mat& Xt, Eigen::Index d, int panels) {
  require(panels >= 1, ErrorKind::invalid_arg, "gfk_kernel_quadrature: panels must be positive");
  const FlowParts fp = flow_parts(Xs, Xt, d);
  const Eigen::Index r = Xs.cols();

  auto phi = [&](double t) -> Mat {
    Mat c(d, 1), s(d, 1);
    for (Eigen::Index i = 0; i < d; ++i) {
      c(i, 0) = std::cos(t * fp.theta(i));
      s(i, 0) = std::sin(t * fp.theta(i));
    }
    return fp.omega1 * c.col(0).asDiagonal() - fp.omega2 * s.col(0).asDiagonal();
  };

  Mat G = Mat::Zero(r, r);
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    const Mat pa = phi(a), pm = phi(a + h / 2.0), pb = phi(a + h);
    G += (h / 6.0) * (pa * pa.transpose() + 4.0 * (pm * pm.transpose()) + pb * pb.transpose());
  }
  return G;
}

}  // namespace glg
