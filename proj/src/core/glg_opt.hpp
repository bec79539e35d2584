#pragma once

#include <functional>

#include "core/common.hpp"
#include "core/lmm.hpp"

namespace glg {

struct GlgConfig {
  double delta0 = 0.01;   // upper limit of the perturbation integral
  int panels = 10;        // composite Simpson panels over [0, delta0]
  int max_iter = 100;
  double err_tol = 1e-5;  // stop once the cost improvement drops below this
  std::vector<double> eta_grid = {0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 5.0, 20.0};
  double lambda_s = -1.0;  // negative derives 0.01/(m*r); zero when m == n
  double lambda_t = -1.0;  // negative derives 0.01/(n*r); zero when m == n
  int csa_nests = 30;
  double csa_discovery = 0.25;
  int csa_iters = 100;
  double csa_lo = 0.0;
  double csa_hi = 1.0;
  std::uint64_t seed = 0;
  double eps_pos = kEpsPos;   // strict positivity floor for map entries
  Eigen::Index span_cap = 600;  // instance cap for the optimization subsample
  Eigen::Index gfk_dim = 0;     // 0 derives max(1, r/2)
};

struct IterRecord {
  double j1 = 0.0;
  double eta = 0.0;
  double grad_norm = 0.0;
};

struct FitTrace {
  double initial_j1 = 0.0;
  std::vector<IterRecord> iters;
  bool reinitialized = false;
  std::string terminal;  // "converged" or "max_iter"
  std::vector<std::string> warnings;
};

// Composite Simpson quadrature node with its accumulated weight.
struct QuadNode {
  double x = 0.0;
  double w = 0.0;
};

std::vector<QuadNode> simpson_nodes(double lo, double hi, int panels);
double simpson_integrate(const std::function<double(double)>& f, double lo, double hi, int panels);

// Shared state for repeated cost and gradient evaluations on one domain pair:
// the seeded optimization subsample, per-node Gram matrices of the perturbed
// data, and the cached heterogeneous distance vectors (map-independent).
class CostContext {
 public:
  CostContext(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg);

  double cost(const LmmPair& maps) const;
  std::pair<Mat, Mat> grad(const LmmPair& maps) const;

  Eigen::Index m() const { return m_; }
  Eigen::Index n() const { return n_; }
  Eigen::Index r() const { return r_; }
  double lambda_s() const { return lambda_s_; }
  double lambda_t() const { return lambda_t_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Node {
    double delta = 0.0;
    double weight = 0.0;
    Mat gram_s;   // (Xs+delta)^T (Xs+delta), m×m
    Mat gram_t;   // n×n
    Mat gram_st;  // m×n
    Vec d_he;     // cached heterogeneous distances at this delta
  };

  void build_node(double delta, double weight, Node& node) const;
  double node_mismatch(const Node& node, const LmmPair& maps) const;
  void node_grad(const Node& node, const LmmPair& maps, Mat& gs, Mat& gt) const;
  void warn_once(const std::string& msg) const;

  Eigen::Index m_ = 0, n_ = 0, r_ = 0, count_ = 0;
  double lambda_s_ = 0.0, lambda_t_ = 0.0;
  GlgConfig cfg_;
  Mat xs_, xt_;  // optimization subsample, count_ rows each
  std::vector<Node> nodes_;
  mutable std::vector<std::string> warnings_;
};

// Integrated geometry-mismatch cost of a map pair, regularization included.
double cost_j1(const Mat& Xs, const Mat& Xt, const LmmPair& maps, const GlgConfig& cfg);

// Analytic gradient of cost_j1 in both maps.
std::pair<Mat, Mat> grad_j1(const Mat& Xs, const Mat& Xt, const LmmPair& maps, const GlgConfig& cfg);

// Cuckoo-search initialization of the map pair over [csa_lo, csa_hi]^D.
LmmPair csa_init(const CostContext& ctx, std::uint64_t seed, const GlgConfig& cfg);

// Full fit: initialization, projected line-searched descent, trace.
std::pair<LmmPair, FitTrace> fit_glg(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg);

struct AdaptResult {
  Mat xs;  // embedded source, N_s×r
  Mat xt;  // embedded target, N_t×r
  LmmPair maps;
  FitTrace trace;
};

// Fits the maps, applies them to every instance, standardizes the mapped
// features, and embeds both domains through the geodesic flow kernel.
AdaptResult adapt_glg(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg);

}  // namespace glg
