#include "glg/glg.h"

#include <cstring>
#include <sstream>

#include <json.hpp>

#include "core/bench.hpp"
#include "core/datasets.hpp"
#include "core/glg_opt.hpp"
#include "core/mlkit.hpp"
#include "core/subspace.hpp"

struct glg_matrix {
  glg::Mat m;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error = "no error";

glg_status to_status(glg::ErrorKind kind) {
  using glg::ErrorKind;
  switch (kind) {
    case ErrorKind::invalid_arg: return GLG_ERR_INVALID_ARG;
    case ErrorKind::dim_mismatch: return GLG_ERR_DIM_MISMATCH;
    case ErrorKind::index_range: return GLG_ERR_INDEX_RANGE;
    case ErrorKind::degenerate: return GLG_ERR_DEGENERATE;
    case ErrorKind::parse: return GLG_ERR_PARSE;
    case ErrorKind::data_missing: return GLG_ERR_DATA_MISSING;
    case ErrorKind::single_class: return GLG_ERR_SINGLE_CLASS;
    case ErrorKind::not_psd: return GLG_ERR_NOT_PSD;
    case ErrorKind::internal: return GLG_ERR_INTERNAL;
  }
  return GLG_ERR_INTERNAL;
}

template <typename Fn>
glg_status guarded(Fn&& fn) {
  try {
    fn();
    return GLG_OK;
  } catch (const glg::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GLG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return GLG_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

glg_matrix* wrap(glg::Mat m) { return new glg_matrix{std::move(m)}; }

glg::GlgConfig config_from_optional_json(const char* config_json) {
  glg::GlgConfig cfg;
  if (config_json == nullptr || config_json[0] == '\0') return cfg;
  json j;
  try {
    j = json::parse(config_json);
  } catch (const std::exception& e) {
    glg::fail(glg::ErrorKind::parse, std::string("config: ") + e.what());
  }
  glg::require(j.is_object(), glg::ErrorKind::parse, "config: expected a JSON object");
  static const std::vector<std::string> known = {
      "delta0",    "panels",        "max_iter",  "err_tol",  "eta_grid", "lambda_s",
      "lambda_t",  "csa_nests",     "csa_discovery", "csa_iters", "csa_lo",   "csa_hi",
      "seed",      "eps_pos",       "span_cap",  "gfk_dim"};
  for (auto it = j.begin(); it != j.end(); ++it)
    glg::require(std::find(known.begin(), known.end(), it.key()) != known.end(),
                 glg::ErrorKind::parse, "config: unknown key '" + it.key() + "'");
  cfg.delta0 = j.value("delta0", cfg.delta0);
  cfg.panels = j.value("panels", cfg.panels);
  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.err_tol = j.value("err_tol", cfg.err_tol);
  if (j.contains("eta_grid")) cfg.eta_grid = j["eta_grid"].get<std::vector<double>>();
  cfg.lambda_s = j.value("lambda_s", cfg.lambda_s);
  cfg.lambda_t = j.value("lambda_t", cfg.lambda_t);
  cfg.csa_nests = j.value("csa_nests", cfg.csa_nests);
  cfg.csa_discovery = j.value("csa_discovery", cfg.csa_discovery);
  cfg.csa_iters = j.value("csa_iters", cfg.csa_iters);
  cfg.csa_lo = j.value("csa_lo", cfg.csa_lo);
  cfg.csa_hi = j.value("csa_hi", cfg.csa_hi);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.eps_pos = j.value("eps_pos", cfg.eps_pos);
  cfg.span_cap = Eigen::Index(j.value("span_cap", std::int64_t(cfg.span_cap)));
  cfg.gfk_dim = Eigen::Index(j.value("gfk_dim", std::int64_t(cfg.gfk_dim)));
  return cfg;
}

}  // namespace

extern "C" {

glg_matrix* glg_matrix_create(size_t rows, size_t cols, const double* data) {
  if (rows == 0 || cols == 0) return nullptr;
  try {
    glg::Mat m = glg::Mat::Zero(Eigen::Index(rows), Eigen::Index(cols));
    if (data != nullptr)
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
          m(Eigen::Index(i), Eigen::Index(j)) = data[i * cols + j];
    return wrap(std::move(m));
  } catch (...) {
    return nullptr;
  }
}

void glg_matrix_destroy(glg_matrix* m) { delete m; }

size_t glg_matrix_rows(const glg_matrix* m) { return m == nullptr ? 0 : size_t(m->m.rows()); }

size_t glg_matrix_cols(const glg_matrix* m) { return m == nullptr ? 0 : size_t(m->m.cols()); }

glg_status glg_matrix_copy_data(const glg_matrix* m, double* out) {
  return guarded([&] {
    glg::require(m != nullptr && out != nullptr, glg::ErrorKind::invalid_arg,
                 "glg_matrix_copy_data: null argument");
    for (Eigen::Index i = 0; i < m->m.rows(); ++i)
      for (Eigen::Index j = 0; j < m->m.cols(); ++j)
        out[size_t(i) * size_t(m->m.cols()) + size_t(j)] = m->m(i, j);
  });
}

const char* glg_last_error(void) { return g_last_error.c_str(); }

void glg_string_destroy(char* s) { delete[] s; }

glg_status glg_zscore(const glg_matrix* x, glg_matrix** out) {
  return guarded([&] {
    glg::require(x != nullptr && out != nullptr, glg::ErrorKind::invalid_arg,
                 "glg_zscore: null argument");
    *out = wrap(glg::zscore(x->m));
  });
}

glg_status glg_domain_distance(const glg_matrix* xs, const glg_matrix* xt, glg_matrix** out) {
  return guarded([&] {
    glg::require(xs != nullptr && xt != nullptr && out != nullptr, glg::ErrorKind::invalid_arg,
                 "glg_domain_distance: null argument");
    glg::Vec d = glg::domain_distance(xs->m, xt->m);
    *out = wrap(d.transpose());
  });
}

glg_status glg_adapt(const glg_matrix* xs, const glg_matrix* xt, const char* config_json,
                     glg_matrix** xs_out, glg_matrix** xt_out) {
  return guarded([&] {
    glg::require(xs != nullptr && xt != nullptr && xs_out != nullptr && xt_out != nullptr,
                 glg::ErrorKind::invalid_arg, "glg_adapt: null argument");
    const glg::GlgConfig cfg = config_from_optional_json(config_json);
    glg::AdaptResult res = glg::adapt_glg(xs->m, xt->m, cfg);
    *xs_out = wrap(std::move(res.xs));
    *xt_out = wrap(std::move(res.xt));
  });
}

glg_status glg_prepare(const char* data_dir, int strict, char** report_json) {
  return guarded([&] {
    glg::require(data_dir != nullptr && report_json != nullptr, glg::ErrorKind::invalid_arg,
                 "glg_prepare: null argument");
    const std::vector<glg::FileStatus> statuses =
        glg::verify_data_dir(data_dir, strict != 0);
    json files = json::array();
    bool ok = true;
    for (const glg::FileStatus& st : statuses) {
      json f;
      f["filename"] = st.filename;
      f["present"] = st.present;
      f["checksum_ok"] = st.checksum_ok;
      f["parsed_ok"] = st.parsed_ok;
      f["optional"] = st.optional;
      f["detail"] = st.detail;
      files.push_back(std::move(f));
      if (!st.optional && !(st.present && st.checksum_ok && st.parsed_ok)) ok = false;
    }
    json j;
    j["data_dir"] = data_dir;
    j["checksums_verified"] = strict != 0;
    j["files"] = std::move(files);
    j["ok"] = ok;
    *report_json = dup_string(j.dump(2) + "\n");
    glg::require(ok, glg::ErrorKind::data_missing,
                 "prepare: required files are missing or unusable (see report)");
  });
}

glg_status glg_run_task(const char* task, const char* model, int runs, uint64_t seed,
                        const char* data_dir, const char* config_json, char** report_json) {
  return guarded([&] {
    glg::require(task != nullptr && model != nullptr && data_dir != nullptr &&
                     report_json != nullptr,
                 glg::ErrorKind::invalid_arg, "glg_run_task: null argument");
    glg::require(runs >= 1, glg::ErrorKind::invalid_arg, "glg_run_task: runs must be positive");
    glg::RunConfig cfg;
    cfg.runs = runs;
    cfg.seed = seed;
    cfg.data_dir = data_dir;
    cfg.glg = config_from_optional_json(config_json);
    const glg::TaskData td = glg::load_task(task, data_dir);
    const glg::TaskReport rep = glg::run_task(td, glg::parse_model(model), cfg);
    *report_json = dup_string(glg::report_to_json(rep, cfg));
  });
}

glg_status glg_run_all(const char* config_path, char** summary) {
  return guarded([&] {
    glg::require(config_path != nullptr && summary != nullptr, glg::ErrorKind::invalid_arg,
                 "glg_run_all: null argument");
    const glg::RunConfig cfg = glg::config_from_json_file(config_path);
    std::ostringstream log;
    const int failures = glg::run_all(cfg, log);
    *summary = dup_string(log.str());
    glg::require(failures == 0, glg::ErrorKind::internal,
                 std::to_string(failures) + " benchmark cells failed");
  });
}

glg_status glg_mmd(const char* task, uint64_t seed, const char* data_dir, char** report_json) {
  return guarded([&] {
    glg::require(task != nullptr && data_dir != nullptr && report_json != nullptr,
                 glg::ErrorKind::invalid_arg, "glg_mmd: null argument");
    glg::RunConfig cfg;
    cfg.data_dir = data_dir;
    *report_json = dup_string(glg::mmd_diagnostic(task, seed, cfg));
  });
}

}  // extern "C"
