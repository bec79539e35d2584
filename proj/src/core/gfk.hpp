#pragma once

#include "core/common.hpp"

namespace glg {

// Closed-form geodesic flow kernel between two homogeneous domains.
struct GfkKernel {
  Mat G;             // r×r, symmetric positive semidefinite
  Eigen::Index d = 0;  // subspace dimension the flow starts from
};

// Builds the kernel from two N_s×r and N_t×r domains sharing feature count r.
// d is the per-domain principal subspace dimension and must satisfy
// 1 <= d <= floor(r/2) so the complement can absorb the flow.
GfkKernel gfk_kernel(const Mat& Xs, const Mat& Xt, Eigen::Index d);

// Embeds instances so inner products in the embedded space equal x^T G z:
// returns X·L where L is the symmetric PSD square root of G.
Mat gfk_embed(const Mat& X, const GfkKernel& kernel);

// Quadrature reference for the kernel: numerically integrates
// Phi(t)Phi(t)^T over t in [0,1] along the geodesic between the two
// principal subspaces. Slow; exists to validate gfk_kernel.
Mat gfk_kernel_quadrature(const Mat& Xs, const Mat& Xt, Eigen::Index d, int panels);

}  // namespace glg
