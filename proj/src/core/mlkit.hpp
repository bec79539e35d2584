#pragma once

#include "core/common.hpp"

namespace glg {

// Column-wise standardization to zero mean and unit sample variance.
// Constant columns map to zero.
Mat zscore(const Mat& X);

// RBF-kernel soft-margin SVM trained by sequential minimal optimization with
// max-violating-pair working-set selection.
struct SvmModel {
  Mat support;     // rows are the support vectors
  Vec coef;        // alpha_i * y_i per support vector
  double bias = 0.0;
  double gamma = 1.0;
};

SvmModel svm_train(const Mat& X, const std::vector<int>& y, double C = 1.0, double gamma = 1.0,
                   double tol = 1e-3);
std::vector<int> svm_predict(const SvmModel& model, const Mat& X);

// Two-cluster Lloyd iteration with seeded initialization; returns ±1 labels
// under a seeded random cluster-to-label assignment.
std::vector<int> kmeans2(const Mat& X, std::uint64_t seed);

// Stratified k-fold cross-validated SVM accuracy; returns (mean, sample std).
std::pair<double, double> kfold_accuracy(const Mat& X, const std::vector<int>& y, int folds,
                                         std::uint64_t seed, double C = 1.0, double gamma = 1.0);

// Unbiased squared maximum mean discrepancy with a permutation test.
struct MmdResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool same_distribution = true;
  double gamma = 1.0;
};

MmdResult mmd2_test(const Mat& X, const Mat& Y, double gamma, int permutations, double alpha,
                    std::uint64_t seed = 0);

// 1 / median pairwise squared distance of the pooled sample.
double median_heuristic_gamma(const Mat& X, const Mat& Y);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace glg
