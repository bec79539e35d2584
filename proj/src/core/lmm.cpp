#include "core/lmm.hpp"

namespace glg {

Mat apply_lmm(const Mat& X, const Mat& U) {
  require(X.cols() == U.cols(), ErrorKind::dim_mismatch,
          "apply_lmm: feature count " + std::to_string(X.cols()) +
              " does not match map width " + std::to_string(U.cols()));
  return X * U.transpose();
}

Mat random_lmm(Eigen::Index r, Eigen::Index m, std::uint64_t seed) {
  require(r >= 1 && m >= 1, ErrorKind::invalid_arg, "random_lmm: dimensions must be positive");
  Rng rng(seed);
  Mat U(r, m);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      U(i, j) = kEpsPos + (1.0 - kEpsPos) * (1.0 - rng.uniform());
  return U;
}

void project_positive(Mat& U, double floor_value) {
  U = U.cwiseMax(floor_value);
}

}  // namespace glg
