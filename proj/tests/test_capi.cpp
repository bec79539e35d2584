#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "core/glg_opt.hpp"
#include "core/mlkit.hpp"
#include "core/subspace.hpp"
#include "glg/glg.h"
#include "test_util.hpp"

using json = nlohmann::json;

namespace {

glg_matrix* to_handle(const glg::Mat& m) {
  std::vector<double> buf(size_t(m.rows()) * size_t(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      buf[size_t(i) * size_t(m.cols()) + size_t(j)] = m(i, j);
  return glg_matrix_create(size_t(m.rows()), size_t(m.cols()), buf.data());
}

glg::Mat to_mat(const glg_matrix* m) {
  const size_t rows = glg_matrix_rows(m);
  const size_t cols = glg_matrix_cols(m);
  std::vector<double> buf(rows * cols);
  REQUIRE(glg_matrix_copy_data(m, buf.data()) == GLG_OK);
  glg::Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out(Eigen::Index(i), Eigen::Index(j)) = buf[i * cols + j];
  return out;
}

// Owns a string returned through a char** out-parameter.
class CStr {
 public:
  ~CStr() { glg_string_destroy(s_); }
  char** slot() { return &s_; }
  std::string str() const { return s_ == nullptr ? std::string() : std::string(s_); }

 private:
  char* s_ = nullptr;
};

// Owns a matrix returned through a glg_matrix** out-parameter.
class CMat {
 public:
  ~CMat() { glg_matrix_destroy(m_); }
  glg_matrix** slot() { return &m_; }
  const glg_matrix* get() const { return m_; }

 private:
  glg_matrix* m_ = nullptr;
};

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("matrix handles round-trip row-major data") {
    const double data[6] = {1, 2, 3, 4, 5, 6};
    glg_matrix* m = glg_matrix_create(2, 3, data);
    REQUIRE(m != nullptr);
    CHECK(glg_matrix_rows(m) == 2);
    CHECK(glg_matrix_cols(m) == 3);
    double out[6] = {0, 0, 0, 0, 0, 0};
    REQUIRE(glg_matrix_copy_data(m, out) == GLG_OK);
    for (int i = 0; i < 6; ++i) CHECK(out[i] == data[i]);
    glg_matrix_destroy(m);

    glg_matrix* z = glg_matrix_create(2, 2, nullptr);
    REQUIRE(z != nullptr);
    double zout[4] = {1, 1, 1, 1};
    REQUIRE(glg_matrix_copy_data(z, zout) == GLG_OK);
    for (int i = 0; i < 4; ++i) CHECK(zout[i] == 0.0);
    glg_matrix_destroy(z);

    CHECK(glg_matrix_create(0, 3, data) == nullptr);
    CHECK(glg_matrix_create(3, 0, data) == nullptr);
    CHECK(glg_matrix_rows(nullptr) == 0);
    CHECK(glg_matrix_cols(nullptr) == 0);

    CHECK(glg_matrix_copy_data(nullptr, out) == GLG_ERR_INVALID_ARG);
    CHECK(glg_matrix_copy_data(m == nullptr ? nullptr : m, nullptr) == GLG_ERR_INVALID_ARG);
    CHECK(std::string(glg_last_error()).find("null") != std::string::npos);
  }

  TEST_CASE("zscore matches the in-process library") {
    glg::Rng rng(41);
    const glg::Mat x = testutil::random_matrix(rng, 9, 4, -3.0, 5.0);
    glg_matrix* hx = to_handle(x);
    CMat out;
    REQUIRE(glg_zscore(hx, out.slot()) == GLG_OK);
    const glg::Mat got = to_mat(out.get());
    const glg::Mat want = glg::zscore(x);
    CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
    glg_matrix_destroy(hx);

    CMat bad;
    CHECK(glg_zscore(nullptr, bad.slot()) == GLG_ERR_INVALID_ARG);
  }

  TEST_CASE("domain distance arrives as a row vector") {
    glg::Rng rng(42);
    const glg::Mat xs = testutil::random_matrix(rng, 20, 5);
    const glg::Mat xt = testutil::random_matrix(rng, 20, 3);
    glg_matrix* hs = to_handle(xs);
    glg_matrix* ht = to_handle(xt);
    CMat out;
    REQUIRE(glg_domain_distance(hs, ht, out.slot()) == GLG_OK);
    CHECK(glg_matrix_rows(out.get()) == 1);
    CHECK(glg_matrix_cols(out.get()) == 3);
    const glg::Mat got = to_mat(out.get());
    const glg::Vec want = glg::domain_distance(xs, xt);
    for (Eigen::Index j = 0; j < want.size(); ++j) CHECK(got(0, j) == want(j));
    glg_matrix_destroy(hs);
    glg_matrix_destroy(ht);
  }

  TEST_CASE("adapt with default config reproduces the library result") {
    glg::Rng rng(43);
    const glg::Mat xs = testutil::random_matrix(rng, 14, 4, 0.0, 1.0);
    const glg::Mat xt = testutil::random_matrix(rng, 11, 4, 0.0, 1.0);
    const glg::AdaptResult want = glg::adapt_glg(xs, xt, glg::GlgConfig{});

    glg_matrix* hs = to_handle(xs);
    glg_matrix* ht = to_handle(xt);
    for (const char* cfg : {(const char*)nullptr, "", "{}"}) {
      CMat os, ot;
      REQUIRE(glg_adapt(hs, ht, cfg, os.slot(), ot.slot()) == GLG_OK);
      CHECK((to_mat(os.get()) - want.xs).cwiseAbs().maxCoeff() == 0.0);
      CHECK((to_mat(ot.get()) - want.xt).cwiseAbs().maxCoeff() == 0.0);
    }
    glg_matrix_destroy(hs);
    glg_matrix_destroy(ht);
  }

  TEST_CASE("adapt forwards config overrides") {
    glg::Rng rng(44);
    const glg::Mat xs = testutil::random_matrix(rng, 16, 4, 0.0, 1.0);
    const glg::Mat xt = testutil::random_matrix(rng, 12, 3, 0.0, 1.0);
    glg::GlgConfig cfg;
    cfg.seed = 3;
    cfg.csa_nests = 5;
    cfg.csa_iters = 6;
    cfg.max_iter = 5;
    const glg::AdaptResult want = glg::adapt_glg(xs, xt, cfg);

    glg_matrix* hs = to_handle(xs);
    glg_matrix* ht = to_handle(xt);
    const char* over = R"({"seed": 3, "csa_nests": 5, "csa_iters": 6, "max_iter": 5})";
    CMat os, ot;
    REQUIRE(glg_adapt(hs, ht, over, os.slot(), ot.slot()) == GLG_OK);
    CHECK((to_mat(os.get()) - want.xs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((to_mat(ot.get()) - want.xt).cwiseAbs().maxCoeff() == 0.0);

    const char* other = R"({"seed": 4, "csa_nests": 5, "csa_iters": 6, "max_iter": 5})";
    CMat os2, ot2;
    REQUIRE(glg_adapt(hs, ht, other, os2.slot(), ot2.slot()) == GLG_OK);
    CHECK((to_mat(os2.get()) - want.xs).cwiseAbs().maxCoeff() > 0.0);
    glg_matrix_destroy(hs);
    glg_matrix_destroy(ht);
  }

  TEST_CASE("adapt rejects bad inputs through status codes") {
    glg::Rng rng(45);
    const glg::Mat xs = testutil::random_matrix(rng, 10, 3, 0.0, 1.0);
    glg_matrix* hs = to_handle(xs);
    glg_matrix* ht = to_handle(xs);
    CMat os, ot;
    CHECK(glg_adapt(nullptr, ht, nullptr, os.slot(), ot.slot()) == GLG_ERR_INVALID_ARG);
    CHECK(glg_adapt(hs, ht, R"({"bogus": 1})", os.slot(), ot.slot()) == GLG_ERR_PARSE);
    CHECK(std::string(glg_last_error()).find("bogus") != std::string::npos);
    CHECK(glg_adapt(hs, ht, "[1, 2]", os.slot(), ot.slot()) == GLG_ERR_PARSE);
    CHECK(glg_adapt(hs, ht, "{", os.slot(), ot.slot()) == GLG_ERR_PARSE);

    glg::Mat bad = xs;
    bad(0, 0) = std::nan("");
    glg_matrix* hb = to_handle(bad);
    CHECK(glg_adapt(hb, ht, nullptr, os.slot(), ot.slot()) == GLG_ERR_INVALID_ARG);
    glg_matrix_destroy(hb);
    glg_matrix_destroy(hs);
    glg_matrix_destroy(ht);
  }

  TEST_CASE("prepare reports every expected file even when the directory is empty") {
    testutil::TempDir dir("capi_prepare");
    CStr report;
    CHECK(glg_prepare(dir.str().c_str(), 1, report.slot()) == GLG_ERR_DATA_MISSING);
    REQUIRE(!report.str().empty());
    const json j = json::parse(report.str());
    CHECK(j.at("data_dir") == dir.str());
    CHECK(j.at("checksums_verified") == true);
    CHECK(j.at("ok") == false);
    REQUIRE(j.at("files").size() == 10);
    int required = 0;
    for (const json& f : j.at("files")) {
      CHECK(f.at("present") == false);
      CHECK(f.at("checksum_ok") == false);
      CHECK(f.at("parsed_ok") == false);
      CHECK(f.at("detail").get<std::string>().find("missing") != std::string::npos);
      if (!f.at("optional").get<bool>()) ++required;
    }
    CHECK(required == 4);

    CStr relaxed;
    CHECK(glg_prepare(dir.str().c_str(), 0, relaxed.slot()) == GLG_ERR_DATA_MISSING);
    CHECK(json::parse(relaxed.str()).at("checksums_verified") == false);

    CStr none;
    CHECK(glg_prepare(nullptr, 1, none.slot()) == GLG_ERR_INVALID_ARG);
    CHECK(glg_prepare(dir.str().c_str(), 1, nullptr) == GLG_ERR_INVALID_ARG);
  }

  TEST_CASE("run task validates arguments before touching the data") {
    CStr report;
    CHECK(glg_run_task("CD2CO", "a1", 0, 7, "/nonexistent", nullptr, report.slot()) ==
          GLG_ERR_INVALID_ARG);
    CHECK(glg_run_task("NOPE", "a1", 1, 7, "/nonexistent", nullptr, report.slot()) ==
          GLG_ERR_INVALID_ARG);
    CHECK(glg_run_task(nullptr, "a1", 1, 7, "/nonexistent", nullptr, report.slot()) ==
          GLG_ERR_INVALID_ARG);
    CHECK(glg_run_task("CD2CO", "a1", 1, 7, "/nonexistent", nullptr, nullptr) ==
          GLG_ERR_INVALID_ARG);
  }

  TEST_CASE("run all surfaces cell failures in the summary") {
    testutil::TempDir data("capi_empty_data");
    testutil::TempDir out("capi_out");
    const json cfg = {{"tasks", {"CD2CO"}}, {"models", {"a1"}},   {"runs", 1},
                      {"seed", 5},          {"data_dir", data.str()}, {"out_dir", out.str()}};
    testutil::TempFile file(cfg.dump(), "capi_runall");
    CStr summary;
    CHECK(glg_run_all(file.str().c_str(), summary.slot()) == GLG_ERR_INTERNAL);
    CHECK(summary.str().find("load failed") != std::string::npos);

    CStr none;
    CHECK(glg_run_all("/nonexistent/config.json", none.slot()) == GLG_ERR_DATA_MISSING);
    CHECK(glg_run_all(nullptr, none.slot()) == GLG_ERR_INVALID_ARG);
  }

  TEST_CASE("mmd rejects null arguments") {
    CStr report;
    CHECK(glg_mmd(nullptr, 7, "/nonexistent", report.slot()) == GLG_ERR_INVALID_ARG);
    CHECK(glg_mmd("CD2CO", 7, nullptr, report.slot()) == GLG_ERR_INVALID_ARG);
  }

  TEST_CASE("run task reproduces the deterministic baseline cell" *
            doctest::skip(testutil::data_dir_or_empty().empty())) {
    const std::string dir = testutil::data_dir_or_empty();
    CStr report;
    REQUIRE(glg_run_task("CD2CO", "a1", 2, 7, dir.c_str(), nullptr, report.slot()) == GLG_OK);
    const json j = json::parse(report.str());
    CHECK(j.at("task") == "CD2CO");
    CHECK(j.at("model") == "a1");
    CHECK(j.at("runs") == 2);
    REQUIRE(j.at("seeds").size() == 2);
    CHECK(j.at("seeds")[0] == 7);
    CHECK(j.at("seeds")[1] == 8);
    REQUIRE(j.at("accuracies").size() == 2);
    CHECK(j.at("avg").get<double>() == doctest::Approx(100.0 * 444.0 / 683.0).epsilon(1e-12));
    CHECK(j.at("std").get<double>() == 0.0);
    CHECK(j.at("config").at("glg").at("delta0") == 0.01);
    CHECK(j.at("warnings").is_array());
  }

  TEST_CASE("run all writes reports and a summary table" *
            doctest::skip(testutil::data_dir_or_empty().empty())) {
    const std::string dir = testutil::data_dir_or_empty();
    testutil::TempDir out("capi_runall_out");
    const json cfg = {{"tasks", {"CD2CO"}}, {"models", {"a1", "cm"}}, {"runs", 1},
                      {"seed", 5},          {"data_dir", dir},        {"out_dir", out.str()}};
    testutil::TempFile file(cfg.dump(), "capi_runall_ok");
    CStr summary;
    REQUIRE(glg_run_all(file.str().c_str(), summary.slot()) == GLG_OK);
    CHECK(summary.str().find("CD2CO") != std::string::npos);
    CHECK(summary.str().find("summary written") != std::string::npos);
    CHECK(std::filesystem::exists(out.file("CD2CO_a1.json")));
    CHECK(std::filesystem::exists(out.file("summary.txt")));
    const json rep = json::parse(std::ifstream(out.file("CD2CO_a1.json")));
    CHECK(rep.at("task") == "CD2CO");
  }

  TEST_CASE("mmd diagnostic reports both stages" *
            doctest::skip(testutil::data_dir_or_empty().empty())) {
    const std::string dir = testutil::data_dir_or_empty();
    CStr report;
    REQUIRE(glg_mmd("CD2CO", 7, dir.c_str(), report.slot()) == GLG_OK);
    const json j = json::parse(report.str());
    CHECK(j.at("task") == "CD2CO");
    CHECK(j.at("seed") == 7);
    for (const char* stage : {"mapped", "adapted"}) {
      const json& s = j.at(stage);
      CHECK(s.at("statistic").is_number());
      CHECK(s.at("p_value").get<double>() > 0.0);
      CHECK(s.at("gamma").get<double>() > 0.0);
      CHECK(s.at("same_distribution").is_boolean());
    }
  }
}
