#pragma once

#include "core/common.hpp"

namespace glg {

inline constexpr double kEpsPos = 1e-6;

// A pair of strictly positive linear maps taking source (r×m) and target
// (r×n) feature spaces into a shared r-dimensional space.
struct LmmPair {
  Mat Us;  // r×m
  Mat Ut;  // r×n
  Eigen::Index r() const { return Us.rows(); }
  Eigen::Index m() const { return Us.cols(); }
  Eigen::Index n() const { return Ut.cols(); }
};

// Applies a map to row-instance data: X (N×m) with U (r×m) gives X·U^T (N×r).
Mat apply_lmm(const Mat& X, const Mat& U);

// Uniformly random strictly positive map with entries in (eps_pos, 1].
Mat random_lmm(Eigen::Index r, Eigen::Index m, std::uint64_t seed);

// Clamps every entry from below to keep the map strictly positive.
void project_positive(Mat& U, double floor_value = kEpsPos);

}  // namespace glg
