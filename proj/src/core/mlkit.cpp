#include "core/mlkit.hpp"

#include <numeric>

namespace glg {

namespace {

Mat rbf_kernel(const Mat& A, const Mat& B, double gamma) {
  const Vec a2 = A.rowwise().squaredNorm();
  const Vec b2 = B.rowwise().squaredNorm();
  Mat K = -2.0 * (A * B.transpose());
  K.colwise() += a2;
  K.rowwise() += b2.transpose();
  return (-gamma * K.array()).exp().matrix();
}

void require_binary(const std::vector<int>& y, const char* where) {
  bool pos = false, neg = false;
  for (int v : y) {
    require(v == 1 || v == -1, ErrorKind::invalid_arg,
            std::string(where) + ": labels must be +1 or -1");
    pos = pos || v == 1;
    neg = neg || v == -1;
  }
  require(pos && neg, ErrorKind::single_class,
          std::string(where) + ": both classes must be present");
}

}  // namespace

Mat zscore(const Mat& X) {
  require(X.rows() >= 2, ErrorKind::invalid_arg, "zscore: need at least two instances");
  Mat Z(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mu = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - mu).square().sum() / double(X.rows() - 1));
    if (sd > 1e-12)
      Z.col(j) = (X.col(j).array() - mu) / sd;
    else
      Z.col(j).setZero();
  }
  return Z;
}

SvmModel svm_train(const Mat& X, const std::vector<int>& y, double C, double gamma, double tol) {
  const Eigen::Index n = X.rows();
  require(size_t(n) == y.size(), ErrorKind::dim_mismatch,
          "svm_train: label count does not match instance count");
  require(n >= 2, ErrorKind::invalid_arg, "svm_train: need at least two instances");
  require(C > 0 && gamma > 0 && tol > 0, ErrorKind::invalid_arg,
          "svm_train: C, gamma and tol must be positive");
  require_binary(y, "svm_train");

  const Mat K = rbf_kernel(X, X, gamma);
  Vec alpha = Vec::Zero(n);
  Vec grad = Vec::Constant(n, -1.0);  // gradient of the dual objective

  auto in_up = [&](Eigen::Index t) {
    return (y[size_t(t)] == 1 && alpha(t) < C) || (y[size_t(t)] == -1 && alpha(t) > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (y[size_t(t)] == 1 && alpha(t) > 0) || (y[size_t(t)] == -1 && alpha(t) < C);
  };

  const long max_steps = 10000000;
  double b_up = 0.0, b_low = 0.0;
  for (long step = 0;; ++step) {
    Eigen::Index i = -1, j = -1;
    double up_val = -std::numeric_limits<double>::infinity();
    double low_val = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -double(y[size_t(t)]) * grad(t);
      if (in_up(t) && v > up_val) {
        up_val = v;
        i = t;
      }
      if (in_low(t) && v < low_val) {
        low_val = v;
        j = t;
      }
    }
    b_up = up_val;
    b_low = low_val;
    if (i < 0 || j < 0 || up_val - low_val < tol || step >= max_steps) break;

    const double quad = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-12);
    double t_step = (up_val - low_val) / quad;
    const double yi = y[size_t(i)], yj = y[size_t(j)];
    const double lo = std::max(yi > 0 ? -alpha(i) : alpha(i) - C,
                               yj > 0 ? alpha(j) - C : -alpha(j));
    const double hi = std::min(yi > 0 ? C - alpha(i) : alpha(i),
                               yj > 0 ? alpha(j) : C - alpha(j));
    t_step = std::clamp(t_step, lo, hi);
    if (t_step == 0.0) break;

    alpha(i) += yi * t_step;
    alpha(j) -= yj * t_step;
    for (Eigen::Index t = 0; t < n; ++t)
      grad(t) += double(y[size_t(t)]) * t_step * (K(t, i) - K(t, j));
  }

  SvmModel model;
  model.gamma = gamma;
  model.bias = (b_up + b_low) / 2.0;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha(t) > 1e-12) sv.push_back(t);
  model.support.resize(Eigen::Index(sv.size()), X.cols());
  model.coef.resize(Eigen::Index(sv.size()));
  for (size_t k = 0; k < sv.size(); ++k) {
    model.support.row(Eigen::Index(k)) = X.row(sv[k]);
    model.coef(Eigen::Index(k)) = alpha(sv[k]) * double(y[size_t(sv[k])]);
  }
  return model;
}

std::vector<int> svm_predict(const SvmModel& model, const Mat& X) {
  require(X.cols() == model.support.cols() || model.support.rows() == 0, ErrorKind::dim_mismatch,
          "svm_predict: feature count does not match the model");
  std::vector<int> out(size_t(X.rows()), 1);
  if (model.support.rows() == 0) return out;
  const Mat K = rbf_kernel(X, model.support, model.gamma);
  const Vec decision = K * model.coef + Vec::Constant(X.rows(), model.bias);
  for (Eigen::Index t = 0; t < X.rows(); ++t) out[size_t(t)] = decision(t) >= 0.0 ? 1 : -1;
  return out;
}

std::vector<int> kmeans2(const Mat& X, std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  require(n >= 2, ErrorKind::invalid_arg, "kmeans2: need at least two instances");
  Rng rng(seed);

  Eigen::Index c0 = Eigen::Index(rng.index(std::uint64_t(n)));
  Eigen::Index c1 = c0;
  while (c1 == c0) c1 = Eigen::Index(rng.index(std::uint64_t(n)));
  Mat centers(2, X.cols());
  centers.row(0) = X.row(c0);
  centers.row(1) = X.row(c1);

  std::vector<int> assign(size_t(n), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double d0 = (X.row(t) - centers.row(0)).squaredNorm();
      const double d1 = (X.row(t) - centers.row(1)).squaredNorm();
      const int a = d1 < d0 ? 1 : 0;
      if (a != assign[size_t(t)]) {
        assign[size_t(t)] = a;
        changed = true;
      }
    }
    for (int c = 0; c < 2; ++c) {
      Vec sum = Vec::Zero(X.cols());
      Eigen::Index cnt = 0;
      for (Eigen::Index t = 0; t < n; ++t)
        if (assign[size_t(t)] == c) {
          sum += X.row(t).transpose();
          ++cnt;
        }
      if (cnt > 0) {
        centers.row(c) = (sum / double(cnt)).transpose();
      } else {
        // Re-seed an emptied cluster at the point farthest from its center.
        Eigen::Index far = 0;
        double best = -1.0;
        for (Eigen::Index t = 0; t < n; ++t) {
          const double d = (X.row(t) - centers.row(1 - c)).squaredNorm();
          if (d > best) {
            best = d;
            far = t;
          }
        }
        centers.row(c) = X.row(far);
        assign[size_t(far)] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }

  const int label0 = rng.uniform() < 0.5 ? 1 : -1;
  std::vector<int> out(static_cast<size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t)
    out[size_t(t)] = assign[size_t(t)] == 0 ? label0 : -label0;
  return out;
}

std::pair<double, double> kfold_accuracy(const Mat& X, const std::vector<int>& y, int folds,
                                         std::uint64_t seed, double C, double gamma) {
  require(folds >= 2, ErrorKind::invalid_arg, "kfold_accuracy: need at least two folds");
  require(size_t(X.rows()) == y.size(), ErrorKind::dim_mismatch,
          "kfold_accuracy: label count does not match instance count");
  require_binary(y, "kfold_accuracy");

  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index t = 0; t < X.rows(); ++t) (y[size_t(t)] == 1 ? pos : neg).push_back(t);
  require(pos.size() >= size_t(folds) && neg.size() >= size_t(folds), ErrorKind::single_class,
          "kfold_accuracy: every fold needs both classes");
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<int> fold_of(size_t(X.rows()), 0);
  for (size_t k = 0; k < pos.size(); ++k) fold_of[size_t(pos[k])] = int(k % size_t(folds));
  for (size_t k = 0; k < neg.size(); ++k) fold_of[size_t(neg[k])] = int(k % size_t(folds));

  std::vector<double> accs;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_idx, test_idx;
    for (Eigen::Index t = 0; t < X.rows(); ++t)
      (fold_of[size_t(t)] == f ? test_idx : train_idx).push_back(t);
    Mat Xtr(Eigen::Index(train_idx.size()), X.cols()), Xte(Eigen::Index(test_idx.size()), X.cols());
    std::vector<int> ytr(train_idx.size()), yte(test_idx.size());
    for (size_t k = 0; k < train_idx.size(); ++k) {
      Xtr.row(Eigen::Index(k)) = X.row(train_idx[k]);
      ytr[k] = y[size_t(train_idx[k])];
    }
    for (size_t k = 0; k < test_idx.size(); ++k) {
      Xte.row(Eigen::Index(k)) = X.row(test_idx[k]);
      yte[k] = y[size_t(test_idx[k])];
    }
    const SvmModel model = svm_train(Xtr, ytr, C, gamma);
    accs.push_back(accuracy(svm_predict(model, Xte), yte));
  }
  return {mean(accs), sample_std(accs)};
}

MmdResult mmd2_test(const Mat& X, const Mat& Y, double gamma, int permutations, double alpha,
                    std::uint64_t seed) {
  require(X.cols() == Y.cols(), ErrorKind::dim_mismatch,
          "mmd2_test: feature counts differ");
  require(X.rows() >= 2 && Y.rows() >= 2, ErrorKind::invalid_arg,
          "mmd2_test: need at least two instances per sample");
  require(gamma > 0 && permutations >= 1 && alpha > 0 && alpha < 1, ErrorKind::invalid_arg,
          "mmd2_test: bad parameters");

  const Eigen::Index nx = X.rows(), ny = Y.rows(), n = nx + ny;
  Mat Z(n, X.cols());
  Z.topRows(nx) = X;
  Z.bottomRows(ny) = Y;
  const Mat K = rbf_kernel(Z, Z, gamma);

  std::vector<Eigen::Index> idx = iota_indices(n);
  auto stat_for = [&](const std::vector<Eigen::Index>& order) {
    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (Eigen::Index a = 0; a < nx; ++a)
      for (Eigen::Index b = 0; b < nx; ++b)
        if (a != b) kxx += K(order[size_t(a)], order[size_t(b)]);
    for (Eigen::Index a = 0; a < ny; ++a)
      for (Eigen::Index b = 0; b < ny; ++b)
        if (a != b) kyy += K(order[size_t(nx + a)], order[size_t(nx + b)]);
    for (Eigen::Index a = 0; a < nx; ++a)
      for (Eigen::Index b = 0; b < ny; ++b) kxy += K(order[size_t(a)], order[size_t(nx + b)]);
    return kxx / double(nx * (nx - 1)) + kyy / double(ny * (ny - 1)) -
           2.0 * kxy / double(nx * ny);
  };

  MmdResult out;
  out.gamma = gamma;
  out.statistic = stat_for(idx);

  Rng rng(seed);
  int geq = 0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(idx);
    if (stat_for(idx) >= out.statistic) ++geq;
  }
  out.p_value = double(1 + geq) / double(1 + permutations);
  out.same_distribution = out.p_value > alpha;
  return out;
}

double median_heuristic_gamma(const Mat& X, const Mat& Y) {
  require(X.cols() == Y.cols(), ErrorKind::dim_mismatch,
          "median_heuristic_gamma: feature counts differ");
  Mat Z(X.rows() + Y.rows(), X.cols());
  Z.topRows(X.rows()) = X;
  Z.bottomRows(Y.rows()) = Y;
  std::vector<double> d2;
  d2.reserve(size_t(Z.rows()) * size_t(Z.rows() - 1) / 2);
  for (Eigen::Index a = 0; a < Z.rows(); ++a)
    for (Eigen::Index b = a + 1; b < Z.rows(); ++b)
      d2.push_back((Z.row(a) - Z.row(b)).squaredNorm());
  if (d2.empty()) return 1.0;
  const size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + long(mid), d2.end());
  const double med = d2[mid];
  return med > 1e-12 ? 1.0 / med : 1.0;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  require(predicted.size() == truth.size(), ErrorKind::dim_mismatch,
          "accuracy: length mismatch");
  require(!truth.empty(), ErrorKind::invalid_arg, "accuracy: empty label set");
  size_t hit = 0;
  for (size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++hit;
  return double(hit) / double(truth.size());
}

}  // namespace glg
