#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/eds.hpp"
#include "core/gfk.hpp"
#include "core/glg_opt.hpp"
#include "core/mlkit.hpp"
#include "core/subspace.hpp"
#include "test_util.hpp"

using glg::CostContext;
using glg::GlgConfig;
using glg::LmmPair;
using glg::Mat;
using glg::QuadNode;
using glg::Vec;

namespace {

// Definitional cost: spans and principal cosines recomputed from scratch at
// every quadrature node, no shared Gram factorizations. Valid while the
// inputs are small enough to dodge the optimization subsample.
double j1_reference(const Mat& Xs, const Mat& Xt, const LmmPair& maps, const GlgConfig& cfg) {
  REQUIRE(Xs.rows() <= cfg.span_cap);
  REQUIRE(Xt.rows() <= cfg.span_cap);
  const bool square = Xs.cols() == Xt.cols();
  const double ls =
      square ? 0.0 : (cfg.lambda_s >= 0.0 ? cfg.lambda_s : 0.01 / double(Xs.cols() * maps.r()));
  const double lt =
      square ? 0.0 : (cfg.lambda_t >= 0.0 ? cfg.lambda_t : 0.01 / double(Xt.cols() * maps.r()));
  double acc = 0.0;
  for (const QuadNode& node : glg::simpson_nodes(0.0, cfg.delta0, cfg.panels)) {
    const Mat xs_d = Xs.array() + node.x;
    const Mat xt_d = Xt.array() + node.x;
    const Vec d_he = glg::domain_distance(xs_d, xt_d);
    const Vec d_ho =
        glg::domain_distance(xs_d * maps.Us.transpose(), xt_d * maps.Ut.transpose());
    acc += node.w * glg::pair_metric(d_he, d_ho);
  }
  return acc + 0.5 * ls * maps.Us.squaredNorm() + 0.5 * lt * maps.Ut.squaredNorm();
}

// Central finite differences of the cost in every map entry.
std::pair<Mat, Mat> fd_grad(const CostContext& ctx, const LmmPair& maps, double h) {
  auto side = [&](bool source) {
    const Mat& U = source ? maps.Us : maps.Ut;
    Mat g(U.rows(), U.cols());
    for (Eigen::Index a = 0; a < U.rows(); ++a)
      for (Eigen::Index b = 0; b < U.cols(); ++b) {
        LmmPair plus = maps, minus = maps;
        (source ? plus.Us : plus.Ut)(a, b) += h;
        (source ? minus.Us : minus.Ut)(a, b) -= h;
        g(a, b) = (ctx.cost(plus) - ctx.cost(minus)) / (2.0 * h);
      }
    return g;
  };
  return {side(true), side(false)};
}

// The cost is piecewise smooth: absolute values kink where a mapped cosine
// crosses its target, clamps kink at cosine 1, and the eigen derivatives
// blow up as mapped spectra degenerate. Reject sampled instances that sit
// close to any of those surfaces so finite differences stay trustworthy.
bool instance_smooth(const Mat& Xs, const Mat& Xt, const LmmPair& maps, const GlgConfig& cfg) {
  for (const QuadNode& node : glg::simpson_nodes(0.0, cfg.delta0, cfg.panels)) {
    const Mat xs_d = Xs.array() + node.x;
    const Mat xt_d = Xt.array() + node.x;
    const Mat fs = xs_d * maps.Us.transpose();
    const Mat ft = xt_d * maps.Ut.transpose();
    const Vec d_he = glg::domain_distance(xs_d, xt_d);
    const Vec d_ho = glg::domain_distance(fs, ft);
    for (Eigen::Index i = 0; i < d_ho.size(); ++i) {
      if (std::abs(d_he(i) - d_ho(i)) < 1e-4) return false;
      if (1.0 - d_ho(i) < 1e-4) return false;
    }
    for (const Mat& f : {fs, ft}) {
      const glg::EigSystem sys = glg::eig_sym_descending((f.transpose() * f).eval());
      const double top = sys.eigvals(0);
      if (sys.eigvals(sys.eigvals.size() - 1) < 1e-6 * top) return false;
      for (Eigen::Index i = 0; i + 1 < sys.eigvals.size(); ++i)
        if (sys.eigvals(i) - sys.eigvals(i + 1) < 1e-3 * top) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("glg_opt") {

TEST_CASE("simpson nodes partition the interval") {
  const auto nodes = glg::simpson_nodes(0.0, 1.0, 10);
  CHECK(nodes.size() == 21);
  CHECK(nodes.front().x == doctest::Approx(0.0));
  CHECK(nodes.back().x == doctest::Approx(1.0));
  double wsum = 0.0;
  for (const QuadNode& n : nodes) wsum += n.w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simpson is exact for cubics and accurate for sine") {
  const double cubic = glg::simpson_integrate([](double x) { return x * x * x; }, 0.0, 1.0, 10);
  CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
  const double sine = glg::simpson_integrate([](double x) { return std::sin(x); }, 0.0, 1.0, 10);
  CHECK(sine == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-7));
}

TEST_CASE("simpson rejects bad setups") {
  testutil::check_error([] { glg::simpson_nodes(0.0, 1.0, 0); }, glg::ErrorKind::invalid_arg);
  testutil::check_error([] { glg::simpson_nodes(1.0, 1.0, 4); }, glg::ErrorKind::invalid_arg);
  testutil::check_error(
      [] {
        glg::simpson_integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); },
                               0.0, 1.0, 2);
      },
      glg::ErrorKind::invalid_arg);
}

TEST_CASE("cost matches the definitional route") {
  glg::Rng rng(41);
  GlgConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n_inst = 6 + Eigen::Index(rng.index(30));
    const Eigen::Index m = 2 + Eigen::Index(rng.index(4));
    const Eigen::Index n = 2 + Eigen::Index(rng.index(3));
    const Eigen::Index r = std::min(m, n);
    const Mat Xs = testutil::random_matrix(rng, n_inst, m);
    const Mat Xt = testutil::random_matrix(rng, n_inst, n);
    LmmPair maps{glg::random_lmm(r, m, rng.u64()), glg::random_lmm(r, n, rng.u64())};
    const double got = glg::cost_j1(Xs, Xt, maps, cfg);
    const double want = j1_reference(Xs, Xt, maps, cfg);
    CHECK(got == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("gradient matches central finite differences away from kinks") {
  glg::Rng rng(57);
  GlgConfig cfg;
  int accepted = 0;
  int attempts = 0;
  while (accepted < 8 && attempts < 200) {
    ++attempts;
    const Eigen::Index n_inst = 4 + Eigen::Index(rng.index(5));
    const Eigen::Index m = 2 + Eigen::Index(rng.index(3));
    const Eigen::Index n = 2 + Eigen::Index(rng.index(2));
    const Eigen::Index r = std::min(m, n);
    const Mat Xs = testutil::random_matrix(rng, n_inst, m);
    const Mat Xt = testutil::random_matrix(rng, n_inst, n);
    const LmmPair maps{glg::random_lmm(r, m, rng.u64()), glg::random_lmm(r, n, rng.u64())};
    if (!instance_smooth(Xs, Xt, maps, cfg)) continue;
    ++accepted;

    CostContext ctx(Xs, Xt, cfg);
    const auto [gs, gt] = ctx.grad(maps);
    const auto [fs, ft] = fd_grad(ctx, maps, 1e-6);
    const auto check_side = [](const Mat& analytic, const Mat& fd) {
      for (Eigen::Index a = 0; a < analytic.rows(); ++a)
        for (Eigen::Index b = 0; b < analytic.cols(); ++b) {
          const double rel = std::abs(fd(a, b) - analytic(a, b)) /
                             std::max(1e-8, std::abs(analytic(a, b)));
          CHECK(rel < 1e-3);
        }
    };
    check_side(gs, fs);
    check_side(gt, ft);
  }
  CHECK(accepted == 8);
}

TEST_CASE("square inputs cost nothing at the identity pair") {
  glg::Rng rng(63);
  GlgConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index m = 2 + Eigen::Index(rng.index(5));
    const Mat Xs = testutil::random_matrix(rng, 20, m);
    const Mat Xt = testutil::random_matrix(rng, 25, m);
    const LmmPair id{Mat::Identity(m, m), Mat::Identity(m, m)};
    CHECK(glg::cost_j1(Xs, Xt, id, cfg) <= 1e-10);
  }
}

TEST_CASE("square fit keeps the identity and matches the plain kernel path") {
  glg::Rng rng(71);
  GlgConfig cfg;
  cfg.seed = 5;
  const Mat Xs = testutil::random_matrix(rng, 24, 4);
  const Mat Xt = testutil::random_matrix(rng, 30, 4);

  const auto [maps, trace] = glg::fit_glg(Xs, Xt, cfg);
  CHECK((maps.Us - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((maps.Ut - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(trace.terminal == "converged");

  const glg::AdaptResult res = glg::adapt_glg(Xs, Xt, cfg);
  const Mat zs = glg::zscore(Xs);
  const Mat zt = glg::zscore(Xt);
  const glg::GfkKernel kernel = glg::gfk_kernel(zs, zt, 2);
  CHECK((res.xs - glg::gfk_embed(zs, kernel)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((res.xt - glg::gfk_embed(zt, kernel)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("cuckoo search is deterministic in the seed") {
  glg::Rng rng(83);
  GlgConfig cfg;
  cfg.csa_nests = 8;
  cfg.csa_iters = 12;
  const Mat Xs = testutil::random_matrix(rng, 15, 4);
  const Mat Xt = testutil::random_matrix(rng, 15, 3);
  CostContext ctx(Xs, Xt, cfg);
  const LmmPair a = glg::csa_init(ctx, 99, cfg);
  const LmmPair b = glg::csa_init(ctx, 99, cfg);
  const LmmPair c = glg::csa_init(ctx, 100, cfg);
  CHECK((a.Us - b.Us).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.Ut - b.Ut).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.Us - c.Us).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.Us.minCoeff() >= cfg.eps_pos);
  CHECK(a.Ut.minCoeff() >= cfg.eps_pos);
}

TEST_CASE("fit trace never increases and keeps maps positive") {
  glg::Rng rng(91);
  GlgConfig cfg;
  cfg.csa_nests = 6;
  cfg.csa_iters = 10;
  cfg.max_iter = 25;
  cfg.seed = 3;
  const Mat Xs = testutil::random_matrix(rng, 18, 4);
  const Mat Xt = testutil::random_matrix(rng, 22, 3);
  const auto [maps, trace] = glg::fit_glg(Xs, Xt, cfg);

  double prev = trace.initial_j1;
  for (const glg::IterRecord& rec : trace.iters) {
    CHECK(rec.j1 <= prev + 1e-12);
    prev = rec.j1;
  }
  CHECK((trace.terminal == "converged" || trace.terminal == "max_iter"));
  CHECK(maps.Us.minCoeff() >= cfg.eps_pos);
  CHECK(maps.Ut.minCoeff() >= cfg.eps_pos);
  CHECK(maps.Us.rows() == 3);
  CHECK(maps.Us.cols() == 4);
  CHECK(maps.Ut.cols() == 3);
}

TEST_CASE("fit is deterministic in the seed") {
  glg::Rng rng(97);
  GlgConfig cfg;
  cfg.csa_nests = 6;
  cfg.csa_iters = 8;
  cfg.max_iter = 10;
  cfg.seed = 11;
  const Mat Xs = testutil::random_matrix(rng, 16, 4);
  const Mat Xt = testutil::random_matrix(rng, 16, 2);
  const auto [maps_a, trace_a] = glg::fit_glg(Xs, Xt, cfg);
  const auto [maps_b, trace_b] = glg::fit_glg(Xs, Xt, cfg);
  CHECK((maps_a.Us - maps_b.Us).cwiseAbs().maxCoeff() == 0.0);
  CHECK((maps_a.Ut - maps_b.Ut).cwiseAbs().maxCoeff() == 0.0);
  CHECK(trace_a.iters.size() == trace_b.iters.size());
}

TEST_CASE("the optimization subsample is seeded, capped and reused") {
  glg::Rng rng(103);
  GlgConfig cfg;
  cfg.span_cap = 12;
  const Mat Xs = testutil::random_matrix(rng, 40, 3);
  const Mat Xt = testutil::random_matrix(rng, 35, 2);
  const LmmPair maps{glg::random_lmm(2, 3, 7), glg::random_lmm(2, 2, 8)};

  cfg.seed = 1;
  const double a = glg::cost_j1(Xs, Xt, maps, cfg);
  const double b = glg::cost_j1(Xs, Xt, maps, cfg);
  CHECK(a == b);
  cfg.seed = 2;
  const double c = glg::cost_j1(Xs, Xt, maps, cfg);
  CHECK(a != c);
}

TEST_CASE("cost and gradient validate their inputs") {
  glg::Rng rng(109);
  GlgConfig cfg;
  const Mat Xs = testutil::random_matrix(rng, 10, 3);
  const Mat Xt = testutil::random_matrix(rng, 10, 2);
  const LmmPair wrong{glg::random_lmm(3, 3, 1), glg::random_lmm(3, 2, 2)};
  testutil::check_error([&] { glg::cost_j1(Xs, Xt, wrong, cfg); },
                        glg::ErrorKind::dim_mismatch);
  testutil::check_error([&] { glg::grad_j1(Xs, Xt, wrong, cfg); },
                        glg::ErrorKind::dim_mismatch);

  Mat bad = Xs;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const LmmPair maps{glg::random_lmm(2, 3, 1), glg::random_lmm(2, 2, 2)};
  testutil::check_error([&] { glg::cost_j1(bad, Xt, maps, cfg); }, glg::ErrorKind::invalid_arg);

  GlgConfig flat = cfg;
  flat.delta0 = 0.0;
  testutil::check_error([&] { glg::cost_j1(Xs, Xt, maps, flat); }, glg::ErrorKind::invalid_arg);
}

TEST_CASE("adapted embeddings reproduce kernel inner products") {
  glg::Rng rng(127);
  GlgConfig cfg;
  cfg.csa_nests = 6;
  cfg.csa_iters = 8;
  cfg.max_iter = 8;
  cfg.seed = 2;
  const Mat Xs = testutil::random_matrix(rng, 20, 4);
  const Mat Xt = testutil::random_matrix(rng, 24, 3);
  const glg::AdaptResult res = glg::adapt_glg(Xs, Xt, cfg);
  CHECK(res.xs.rows() == 20);
  CHECK(res.xt.rows() == 24);
  CHECK(res.xs.cols() == 3);
  CHECK(res.xt.cols() == 3);

  const Mat zs = glg::zscore(glg::apply_lmm(Xs, res.maps.Us));
  const Mat zt = glg::zscore(glg::apply_lmm(Xt, res.maps.Ut));
  const glg::GfkKernel kernel = glg::gfk_kernel(zs, zt, 1);
  const Mat want = zs * kernel.G * zt.transpose();
  const Mat got = res.xs * res.xt.transpose();
  CHECK((want - got).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + want.cwiseAbs().maxCoeff()));
}

}  // TEST_SUITE
