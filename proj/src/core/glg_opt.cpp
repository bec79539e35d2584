#include "core/glg_opt.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "core/eds.hpp"
#include "core/gfk.hpp"
#include "core/mlkit.hpp"
#include "core/subspace.hpp"

namespace glg {

namespace {

enum SeedStage : std::uint64_t {
  kStageSubsampleS = 0xA1,
  kStageSubsampleT = 0xA2,
  kStageCsa = 0xA3,
  kStageCsaRetry = 0xA4,
};

struct NodeDegenerate {
  std::string detail;
};

// Eigendecomposition of U·Gram·U^T with eigenvalues descending and clamped at
// zero. lam holds the spectrum shared by f·f^T and f^T·f.
struct MappedSpectrum {
  Vec lam;      // length r
  Mat vecs;     // r×r
  Eigen::Index rank = 0;
};

MappedSpectrum mapped_spectrum(const Mat& gram, const Mat& U) {
  MappedSpectrum out;
  Mat G = U * gram * U.transpose();
  EigSystem sys = eig_sym_descending(((G + G.transpose()) / 2.0).eval());
  out.lam = sys.eigvals.cwiseMax(0.0);
  out.vecs = std::move(sys.eigvecs);
  const double tol = out.lam(0) * 1e-10;
  for (Eigen::Index i = 0; i < out.lam.size(); ++i)
    if (out.lam(i) > tol) ++out.rank;
  return out;
}

Vec inv_sqrt(const Vec& lam, Eigen::Index rank) {
  Vec d = Vec::Zero(lam.size());
  for (Eigen::Index i = 0; i < rank; ++i) d(i) = 1.0 / std::sqrt(lam(i));
  return d;
}

double mantegna_sigma(double beta) {
  const double num = std::tgamma(1.0 + beta) * std::sin(M_PI * beta / 2.0);
  const double den = std::tgamma((1.0 + beta) / 2.0) * beta * std::pow(2.0, (beta - 1.0) / 2.0);
  return std::pow(num / den, 1.0 / beta);
}

}  // namespace

std::vector<QuadNode> simpson_nodes(double lo, double hi, int panels) {
  require(panels >= 1, ErrorKind::invalid_arg, "simpson_nodes: panels must be positive");
  require(hi > lo, ErrorKind::invalid_arg, "simpson_nodes: empty interval");
  const double h = (hi - lo) / panels;
  std::vector<QuadNode> nodes(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) {
    nodes[i].x = lo + i * h / 2.0;
    if (i == 0 || i == 2 * panels)
      nodes[i].w = h / 6.0;
    else if (i % 2 == 1)
      nodes[i].w = 4.0 * h / 6.0;
    else
      nodes[i].w = 2.0 * h / 6.0;
  }
  return nodes;
}

double simpson_integrate(const std::function<double(double)>& f, double lo, double hi,
                         int panels) {
  double acc = 0.0;
  for (const QuadNode& node : simpson_nodes(lo, hi, panels)) {
    const double v = f(node.x);
    require(std::isfinite(v), ErrorKind::invalid_arg,
            "simpson_integrate: non-finite integrand at x = " + std::to_string(node.x));
    acc += node.w * v;
  }
  return acc;
}

CostContext::CostContext(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg) : cfg_(cfg) {
  require(Xs.rows() >= 1 && Xt.rows() >= 1, ErrorKind::invalid_arg,
          "cost context: empty domain");
  require(Xs.allFinite() && Xt.allFinite(), ErrorKind::invalid_arg,
          "cost context: non-finite data");
  m_ = Xs.cols();
  n_ = Xt.cols();
  r_ = std::min(m_, n_);
  require(r_ >= 1, ErrorKind::invalid_arg, "cost context: empty feature space");
  require(cfg.span_cap >= 1, ErrorKind::invalid_arg, "cost context: span_cap must be positive");

  count_ = std::min({Xs.rows(), Xt.rows(), cfg.span_cap});
  auto take = [&](const Mat& X, std::uint64_t stage) {
    if (X.rows() == count_) return X;
    Rng rng(mix_seed(cfg.seed, stage));
    std::vector<Eigen::Index> idx =
        rng.sample_without_replacement(X.rows(), count_);
    Mat out(count_, X.cols());
    for (Eigen::Index i = 0; i < count_; ++i) out.row(i) = X.row(idx[size_t(i)]);
    return out;
  };
  xs_ = take(Xs, kStageSubsampleS);
  xt_ = take(Xt, kStageSubsampleT);

  if (m_ == n_) {
    lambda_s_ = 0.0;
    lambda_t_ = 0.0;
  } else {
    lambda_s_ = cfg.lambda_s >= 0.0 ? cfg.lambda_s : 0.01 / double(m_ * r_);
    lambda_t_ = cfg.lambda_t >= 0.0 ? cfg.lambda_t : 0.01 / double(n_ * r_);
  }

  const std::vector<QuadNode> qn = simpson_nodes(0.0, cfg.delta0, cfg.panels);
  nodes_.resize(qn.size());
  for (size_t i = 0; i < qn.size(); ++i) build_node(qn[i].x, qn[i].w, nodes_[i]);
}

void CostContext::build_node(double delta, double weight, Node& node) const {
  node.delta = delta;
  node.weight = weight;
  const Mat xs_d = xs_.array() + delta;
  const Mat xt_d = xt_.array() + delta;
  node.gram_s = xs_d.transpose() * xs_d;
  node.gram_t = xt_d.transpose() * xt_d;
  node.gram_st = xs_d.transpose() * xt_d;
  std::vector<std::string> local;
  node.d_he = domain_distance(xs_d, xt_d, &local);
  for (const std::string& w : local) warn_once(w);
}

void CostContext::warn_once(const std::string& msg) const {
  if (std::find(warnings_.begin(), warnings_.end(), msg) == warnings_.end())
    warnings_.push_back(msg);
}

double CostContext::node_mismatch(const Node& node, const LmmPair& maps) const {
  const MappedSpectrum ss = mapped_spectrum(node.gram_s, maps.Us);
  const MappedSpectrum st = mapped_spectrum(node.gram_t, maps.Ut);

  if (ss.rank < r_ || st.rank < r_) {
    // Rank-deficient mapped span: fall back to the definitional route, which
    // completes the basis explicitly.
    warn_once("cost: rank-deficient mapped span at delta = " + std::to_string(node.delta) +
              "; using the spanning fallback");
    const Mat fs = (xs_.array() + node.delta).matrix() * maps.Us.transpose();
    const Mat ft = (xt_.array() + node.delta).matrix() * maps.Ut.transpose();
    std::vector<std::string> local;
    Vec d_ho = domain_distance(fs, ft, &local);
    for (const std::string& w : local) warn_once(w);
    return pair_metric(node.d_he, d_ho);
  }

  const Vec ds = inv_sqrt(ss.lam, r_);
  const Vec dt = inv_sqrt(st.lam, r_);
  const Mat cross = maps.Us * node.gram_st * maps.Ut.transpose();
  const Mat M = ds.asDiagonal() * ss.vecs.transpose() * cross * st.vecs * dt.asDiagonal();
  Eigen::JacobiSVD<Mat> svd(M);
  Vec d_ho = svd.singularValues();
  for (Eigen::Index i = 0; i < d_ho.size(); ++i) d_ho(i) = std::clamp(d_ho(i), 0.0, 1.0);
  return pair_metric(node.d_he, d_ho);
}

double CostContext::cost(const LmmPair& maps) const {
  require(maps.Us.rows() == r_ && maps.Us.cols() == m_, ErrorKind::dim_mismatch,
          "cost: source map must be " + std::to_string(r_) + "x" + std::to_string(m_));
  require(maps.Ut.rows() == r_ && maps.Ut.cols() == n_, ErrorKind::dim_mismatch,
          "cost: target map must be " + std::to_string(r_) + "x" + std::to_string(n_));
  double acc = 0.0;
  for (const Node& node : nodes_) acc += node.weight * node_mismatch(node, maps);
  acc += 0.5 * lambda_s_ * maps.Us.squaredNorm();
  acc += 0.5 * lambda_t_ * maps.Ut.squaredNorm();
  require(std::isfinite(acc), ErrorKind::invalid_arg, "cost: non-finite value");
  return acc;
}

void CostContext::node_grad(const Node& node, const LmmPair& maps, Mat& gs, Mat& gt) const {
  const MappedSpectrum ss = mapped_spectrum(node.gram_s, maps.Us);
  const MappedSpectrum st = mapped_spectrum(node.gram_t, maps.Ut);
  if (ss.rank < r_ || st.rank < r_)
    throw NodeDegenerate{"rank-deficient mapped span at delta = " + std::to_string(node.delta)};

  auto check_gaps = [&](const Vec& lam, const char* side) {
    for (Eigen::Index i = 0; i + 1 < r_; ++i)
      if (lam(i) - lam(i + 1) <= 1e-8)
        throw NodeDegenerate{std::string(side) + " spectrum gap " +
                             std::to_string(lam(i) - lam(i + 1)) + " at delta = " +
                             std::to_string(node.delta)};
    if (count_ > r_ && lam(r_ - 1) <= 1e-8)
      throw NodeDegenerate{std::string(side) + " smallest eigenvalue " +
                           std::to_string(lam(r_ - 1)) + " too close to the zero eigenspace"};
  };
  check_gaps(ss.lam, "source");
  check_gaps(st.lam, "target");

  const Vec ds = inv_sqrt(ss.lam, r_);
  const Vec dt = inv_sqrt(st.lam, r_);
  const Mat cross = maps.Us * node.gram_st * maps.Ut.transpose();  // fs^T ft
  const Mat M = ds.asDiagonal() * ss.vecs.transpose() * cross * st.vecs * dt.asDiagonal();
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& U = svd.matrixU();
  const Mat& V = svd.matrixV();
  Vec sigma = svd.singularValues();

  Vec sgn(r_);
  bool any = false;
  for (Eigen::Index i = 0; i < r_; ++i) {
    const double diff = node.d_he(i) - std::clamp(sigma(i), 0.0, 1.0);
    sgn(i) = diff > 0.0 ? -1.0 : (diff < 0.0 ? 1.0 : 0.0);
    any = any || sgn(i) != 0.0;
  }
  gs = Mat::Zero(r_, m_);
  gt = Mat::Zero(r_, n_);
  if (!any) return;

  // One side of the singular-value derivative. With Y the mapped-span basis
  // and W the other side's basis rotated by the singular vectors, the
  // eigenvector derivative collapses onto small matrices:
  //   A = f^T Y, B = Xd^T Y, E = Xd^T W, F = f^T W, T = Y^T W.
  auto accumulate = [&](const MappedSpectrum& own, const Vec& own_inv_sqrt, const Mat& own_gram,
                        const Mat& own_cross,  // Xd_own^T f_other, p×r
                        const Mat& rot_own, const Mat& rot_other, const Mat& cross_ft,
                        const Vec& other_inv_sqrt, const Mat& other_vecs, const Mat& own_map,
                        Mat& out) {
    const Eigen::Index p = own_map.cols();
    const Mat wcoef = other_vecs * other_inv_sqrt.asDiagonal() * rot_other;  // r×r
    const Mat A = own.vecs * own.lam.cwiseSqrt().asDiagonal();               // r×r
    const Mat B = own_gram * own_map.transpose() * own.vecs * own_inv_sqrt.asDiagonal();  // p×r
    const Mat E = own_cross * wcoef;                                         // p×r
    const Mat F = cross_ft * wcoef;                                          // r×r
    const Mat T = rot_own * sigma.asDiagonal();                              // r×r
    const Mat BT = B * T;
    const Mat AT = A * T;

    Mat gamma(p, r_), kappa(r_, r_);
    Vec coef(r_);
    for (Eigen::Index i = 0; i < r_; ++i) {
      if (sgn(i) == 0.0) continue;
      for (Eigen::Index l = 0; l < r_; ++l) {
        for (Eigen::Index j = 0; j < r_; ++j)
          coef(j) = j == l ? 0.0 : T(j, i) / (own.lam(j) - own.lam(l));
        const double inv_l = 1.0 / own.lam(l);
        gamma.col(l) = B * coef - inv_l * (E.col(i) - BT.col(i));
        kappa.col(l) = A * coef - inv_l * (F.col(i) - AT.col(i));
      }
      const Vec u = rot_own.col(i);
      out.noalias() -=
          sgn(i) * (A * u.asDiagonal() * gamma.transpose() + kappa * u.asDiagonal() * B.transpose());
    }
  };

  // Source side: Y from the source span, W = S_t · V.
  accumulate(ss, ds, node.gram_s, node.gram_st * maps.Ut.transpose(), U, V, cross, dt, st.vecs,
             maps.Us, gs);
  // Target side: transposing M swaps the roles of U and V.
  accumulate(st, dt, node.gram_t, node.gram_st.transpose() * maps.Us.transpose(), V, U,
             cross.transpose(), ds, ss.vecs, maps.Ut, gt);
}

std::pair<Mat, Mat> CostContext::grad(const LmmPair& maps) const {
  require(maps.Us.rows() == r_ && maps.Us.cols() == m_, ErrorKind::dim_mismatch,
          "grad: source map must be " + std::to_string(r_) + "x" + std::to_string(m_));
  require(maps.Ut.rows() == r_ && maps.Ut.cols() == n_, ErrorKind::dim_mismatch,
          "grad: target map must be " + std::to_string(r_) + "x" + std::to_string(n_));
  Mat gs_total = lambda_s_ * maps.Us;
  Mat gt_total = lambda_t_ * maps.Ut;
  for (const Node& node : nodes_) {
    Mat gs, gt;
    try {
      node_grad(node, maps, gs, gt);
    } catch (const NodeDegenerate& first) {
      // One retry at a nudged sample point before giving up.
      Node retry;
      build_node(node.delta + 1e-9, node.weight, retry);
      try {
        node_grad(retry, maps, gs, gt);
        warn_once("grad: degenerate spectrum retried at delta = " + std::to_string(retry.delta) +
                  " (" + first.detail + ")");
      } catch (const NodeDegenerate& second) {
        fail(ErrorKind::degenerate, "grad: " + second.detail + " (after retry)");
      }
    }
    gs_total += node.weight * gs;
    gt_total += node.weight * gt;
  }
  require(gs_total.allFinite() && gt_total.allFinite(), ErrorKind::invalid_arg,
          "grad: non-finite value");
  return {std::move(gs_total), std::move(gt_total)};
}

double cost_j1(const Mat& Xs, const Mat& Xt, const LmmPair& maps, const GlgConfig& cfg) {
  return CostContext(Xs, Xt, cfg).cost(maps);
}

std::pair<Mat, Mat> grad_j1(const Mat& Xs, const Mat& Xt, const LmmPair& maps,
                            const GlgConfig& cfg) {
  return CostContext(Xs, Xt, cfg).grad(maps);
}

LmmPair csa_init(const CostContext& ctx, std::uint64_t seed, const GlgConfig& cfg) {
  const Eigen::Index r = ctx.r(), m = ctx.m(), n = ctx.n();
  const Eigen::Index dim = r * (m + n);
  const int nests = cfg.csa_nests;
  require(nests >= 2, ErrorKind::invalid_arg, "csa_init: need at least two nests");
  require(cfg.csa_hi > cfg.csa_lo, ErrorKind::invalid_arg, "csa_init: empty search box");

  Rng rng(seed);
  auto decode = [&](const Vec& x) {
    LmmPair maps;
    maps.Us = Eigen::Map<const Mat>(x.data(), r, m).cwiseMax(cfg.eps_pos);
    maps.Ut = Eigen::Map<const Mat>(x.data() + r * m, r, n).cwiseMax(cfg.eps_pos);
    return maps;
  };
  auto fitness = [&](const Vec& x) { return ctx.cost(decode(x)); };
  auto clamp_box = [&](Vec& x) {
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = std::clamp(x(i), cfg.csa_lo, cfg.csa_hi);
  };

  std::vector<Vec> nest(static_cast<size_t>(nests));
  std::vector<double> fit(static_cast<size_t>(nests));
  for (int k = 0; k < nests; ++k) {
    nest[k].resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      nest[k](i) = cfg.csa_lo + (cfg.csa_hi - cfg.csa_lo) * rng.uniform();
    fit[k] = fitness(nest[k]);
  }
  int best = 0;
  for (int k = 1; k < nests; ++k)
    if (fit[k] < fit[best]) best = k;

  const double beta = 1.5;
  const double sigma_u = mantegna_sigma(beta);

  for (int iter = 0; iter < cfg.csa_iters; ++iter) {
    // Levy-flight step around the current best nest.
    for (int k = 0; k < nests; ++k) {
      Vec cand = nest[k];
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double u = rng.gaussian() * sigma_u;
        const double v = rng.gaussian();
        const double levy = u / std::pow(std::abs(v), 1.0 / beta);
        const double stepsize = 0.01 * levy * (nest[k](i) - nest[best](i));
        cand(i) += stepsize * rng.gaussian();
      }
      clamp_box(cand);
      const double f = fitness(cand);
      if (f <= fit[k]) {
        nest[k] = std::move(cand);
        fit[k] = f;
      }
    }
    for (int k = 0; k < nests; ++k)
      if (fit[k] < fit[best]) best = k;

    // A fraction of nests is abandoned and rebuilt from nest differences.
    std::vector<Eigen::Index> perm1 = iota_indices(nests), perm2 = iota_indices(nests);
    std::vector<std::vector<bool>> mask(static_cast<size_t>(nests), std::vector<bool>(static_cast<size_t>(dim)));
    for (int k = 0; k < nests; ++k)
      for (Eigen::Index i = 0; i < dim; ++i) mask[k][size_t(i)] = rng.uniform() > cfg.csa_discovery;
    const double scale = rng.uniform();
    rng.shuffle(perm1);
    rng.shuffle(perm2);
    for (int k = 0; k < nests; ++k) {
      Vec cand = nest[k];
      for (Eigen::Index i = 0; i < dim; ++i)
        if (mask[k][size_t(i)])
          cand(i) += scale * (nest[size_t(perm1[size_t(k)])](i) - nest[size_t(perm2[size_t(k)])](i));
      clamp_box(cand);
      const double f = fitness(cand);
      if (f <= fit[k]) {
        nest[k] = std::move(cand);
        fit[k] = f;
      }
    }
    for (int k = 0; k < nests; ++k)
      if (fit[k] < fit[best]) best = k;
  }
  return decode(nest[size_t(best)]);
}

std::pair<LmmPair, FitTrace> fit_glg(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg) {
  CostContext ctx(Xs, Xt, cfg);
  const Eigen::Index r = ctx.r(), m = ctx.m(), n = ctx.n();

  FitTrace trace;
  LmmPair maps;
  if (m == n) {
    maps.Us = Mat::Identity(r, m);
    maps.Ut = Mat::Identity(r, n);
  } else {
    maps = csa_init(ctx, mix_seed(cfg.seed, kStageCsa), cfg);
  }
  double j = ctx.cost(maps);
  trace.initial_j1 = j;

  if (m == n) {
    // The cost is nonnegative, both penalties vanish for square inputs, and
    // the identity pair already attains zero, so no positive-map step can
    // improve it. Descending anyway would only let the positivity floor
    // corrupt the exact identity.
    trace.terminal = "converged";
    trace.warnings = ctx.warnings();
    return {std::move(maps), std::move(trace)};
  }

  bool reinit_used = false;
  bool converged = false;
  int it = 0;
  while (it < cfg.max_iter) {
    ++it;
    auto [gs, gt] = ctx.grad(maps);
    const double gnorm = std::sqrt(gs.squaredNorm() + gt.squaredNorm());

    double best_j = std::numeric_limits<double>::infinity();
    double best_eta = 0.0;
    LmmPair best_maps;
    for (double eta : cfg.eta_grid) {
      LmmPair cand;
      cand.Us = (maps.Us - eta * gs).cwiseMax(cfg.eps_pos);
      cand.Ut = (maps.Ut - eta * gt).cwiseMax(cfg.eps_pos);
      const double jc = ctx.cost(cand);
      if (jc < best_j) {
        best_j = jc;
        best_eta = eta;
        best_maps = std::move(cand);
      }
    }

    if (best_j <= j) {
      const double delta_j = j - best_j;
      maps = std::move(best_maps);
      j = best_j;
      trace.iters.push_back({j, best_eta, gnorm});
      if (delta_j < cfg.err_tol) {
        converged = true;
        break;
      }
    } else if (it == 1 && !reinit_used) {
      maps = csa_init(ctx, mix_seed(cfg.seed, kStageCsaRetry), cfg);
      j = ctx.cost(maps);
      trace.reinitialized = true;
      reinit_used = true;
      it = 0;
    } else {
      // No step on the grid improves the cost; keep the current point.
      converged = true;
      break;
    }
  }
  trace.terminal = converged ? "converged" : "max_iter";
  trace.warnings = ctx.warnings();
  return {std::move(maps), std::move(trace)};
}

AdaptResult adapt_glg(const Mat& Xs, const Mat& Xt, const GlgConfig& cfg) {
  auto [maps, trace] = fit_glg(Xs, Xt, cfg);
  const Eigen::Index r = maps.r();
  const Eigen::Index d = cfg.gfk_dim > 0 ? cfg.gfk_dim : std::max<Eigen::Index>(1, r / 2);

  AdaptResult out;
  out.xs = zscore(apply_lmm(Xs, maps.Us));
  out.xt = zscore(apply_lmm(Xt, maps.Ut));
  const GfkKernel kernel = gfk_kernel(out.xs, out.xt, d);
  out.xs = gfk_embed(out.xs, kernel);
  out.xt = gfk_embed(out.xt, kernel);
  out.maps = std::move(maps);
  out.trace = std::move(trace);
  return out;
}

}  // namespace glg
