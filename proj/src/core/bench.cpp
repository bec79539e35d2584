#include "core/bench.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "core/eds.hpp"
#include "core/gfk.hpp"
#include "core/mlkit.hpp"

namespace glg {

namespace {

using nlohmann::json;

enum SeedStage : std::uint64_t {
  kStPermS = 0xB1,
  kStPermT = 0xB2,
  kStSampleS = 0xB3,
  kStSampleT = 0xB4,
  kStKmeans = 0xB5,
  kStRmgS = 0xB6,
  kStRmgT = 0xB7,
  kStRlgS = 0xB8,
  kStRlgT = 0xB9,
  kStMmdMapped = 0xBA,
  kStMmdAdapted = 0xBB,
};

enum class SamplePolicy { balanced600, full, text_cap };

SamplePolicy policy_for(const std::string& code) {
  if (code == "G2A" || code == "A2G") return SamplePolicy::balanced600;
  if (code == "CO2CD" || code == "CD2CO") return SamplePolicy::full;
  return SamplePolicy::text_cap;
}

Eigen::Index min_class_count(const LabeledDomain& d) {
  Eigen::Index pos = 0, neg = 0;
  for (int v : d.y) (v == 1 ? pos : neg)++;
  return std::min(pos, neg);
}

LabeledDomain sample_for_run(const LabeledDomain& d, SamplePolicy policy, std::uint64_t seed) {
  switch (policy) {
    case SamplePolicy::balanced600:
      return sample_unbiased(d, 600, seed);
    case SamplePolicy::full:
      return d;
    case SamplePolicy::text_cap: {
      const Eigen::Index n = std::min<Eigen::Index>(1500, 2 * min_class_count(d));
      return sample_unbiased(d, n, seed);
    }
  }
  fail(ErrorKind::internal, "unreachable sampling policy");
}

Mat pca_project(const Mat& X, Eigen::Index r) {
  require(X.cols() >= r, ErrorKind::dim_mismatch, "pca_project: too few features");
  const Mat cov = X.transpose() * X / double(X.rows() - 1);
  EigSystem sys = eig_sym_descending(cov);
  return X * sys.eigvecs.leftCols(r);
}

Mat gaussian_map(Eigen::Index r, Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  Mat U(r, m);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < m; ++j) U(i, j) = rng.gaussian();
  return U;
}

void merge_warnings(std::vector<std::string>* sink, const std::vector<std::string>& add) {
  if (sink == nullptr) return;
  for (const std::string& w : add)
    if (std::find(sink->begin(), sink->end(), w) == sink->end()) sink->push_back(w);
}

json glg_config_to_json(const GlgConfig& g) {
  json j;
  j["delta0"] = g.delta0;
  j["panels"] = g.panels;
  j["max_iter"] = g.max_iter;
  j["err_tol"] = g.err_tol;
  j["eta_grid"] = g.eta_grid;
  j["lambda_s"] = g.lambda_s;
  j["lambda_t"] = g.lambda_t;
  j["csa_nests"] = g.csa_nests;
  j["csa_discovery"] = g.csa_discovery;
  j["csa_iters"] = g.csa_iters;
  j["csa_lo"] = g.csa_lo;
  j["csa_hi"] = g.csa_hi;
  j["eps_pos"] = g.eps_pos;
  j["span_cap"] = std::int64_t(g.span_cap);
  j["gfk_dim"] = std::int64_t(g.gfk_dim);
  return j;
}

void glg_config_from_json(const json& j, GlgConfig& g) {
  static const std::vector<std::string> known = {
      "delta0",   "panels",        "max_iter",  "err_tol", "eta_grid",
      "lambda_s", "lambda_t",      "csa_nests", "csa_discovery", "csa_iters",
      "csa_lo",   "csa_hi",        "eps_pos",   "span_cap", "gfk_dim"};
  for (auto it = j.begin(); it != j.end(); ++it)
    require(std::find(known.begin(), known.end(), it.key()) != known.end(), ErrorKind::parse,
            "config: unknown glg key '" + it.key() + "'");
  g.delta0 = j.value("delta0", g.delta0);
  g.panels = j.value("panels", g.panels);
  g.max_iter = j.value("max_iter", g.max_iter);
  g.err_tol = j.value("err_tol", g.err_tol);
  if (j.contains("eta_grid")) g.eta_grid = j["eta_grid"].get<std::vector<double>>();
  g.lambda_s = j.value("lambda_s", g.lambda_s);
  g.lambda_t = j.value("lambda_t", g.lambda_t);
  g.csa_nests = j.value("csa_nests", g.csa_nests);
  g.csa_discovery = j.value("csa_discovery", g.csa_discovery);
  g.csa_iters = j.value("csa_iters", g.csa_iters);
  g.csa_lo = j.value("csa_lo", g.csa_lo);
  g.csa_hi = j.value("csa_hi", g.csa_hi);
  g.eps_pos = j.value("eps_pos", g.eps_pos);
  g.span_cap = Eigen::Index(j.value("span_cap", std::int64_t(g.span_cap)));
  g.gfk_dim = Eigen::Index(j.value("gfk_dim", std::int64_t(g.gfk_dim)));
}

std::string format_cell(const TaskReport& rep) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << rep.avg << "+-" << rep.std_dev << " ("
     << rep.max_acc << ", " << rep.min_acc << ")";
  return os.str();
}

}  // namespace

ModelKind parse_model(const std::string& name) {
  static const std::map<std::string, ModelKind> names = {
      {"a1", ModelKind::A1},   {"cm", ModelKind::CM},   {"dg", ModelKind::DG},
      {"rmg", ModelKind::RMG}, {"rlg", ModelKind::RLG}, {"glg", ModelKind::GLG}};
  std::string lower;
  for (char c : name) lower.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  auto it = names.find(lower);
  require(it != names.end(), ErrorKind::invalid_arg, "unknown model '" + name + "'");
  return it->second;
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::A1: return "a1";
    case ModelKind::CM: return "cm";
    case ModelKind::DG: return "dg";
    case ModelKind::RMG: return "rmg";
    case ModelKind::RLG: return "rlg";
    case ModelKind::GLG: return "glg";
  }
  fail(ErrorKind::internal, "unreachable model kind");
}

const std::vector<ModelKind>& all_models() {
  static const std::vector<ModelKind> kinds = {ModelKind::A1,  ModelKind::CM,  ModelKind::DG,
                                               ModelKind::RMG, ModelKind::RLG, ModelKind::GLG};
  return kinds;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), ErrorKind::data_missing, path + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  static const std::vector<std::string> known = {"tasks", "models", "runs",   "seed",
                                                 "data_dir", "out_dir", "glg"};
  for (auto it = j.begin(); it != j.end(); ++it)
    require(std::find(known.begin(), known.end(), it.key()) != known.end(), ErrorKind::parse,
            path + ": unknown key '" + it.key() + "'");

  RunConfig cfg;
  try {
    if (j.contains("tasks")) cfg.tasks = j["tasks"].get<std::vector<std::string>>();
    if (j.contains("models")) cfg.models = j["models"].get<std::vector<std::string>>();
    cfg.runs = j.value("runs", cfg.runs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.data_dir = j.value("data_dir", cfg.data_dir);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("glg")) glg_config_from_json(j["glg"], cfg.glg);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  require(cfg.runs >= 1, ErrorKind::invalid_arg, "config: runs must be positive");
  return cfg;
}

TaskData load_task(const std::string& task_code, const std::string& data_dir) {
  TaskData td;
  td.spec = find_task(task_code);
  td.source = load_domain(td.spec.source_name, data_dir);
  td.target = load_domain(td.spec.target_name, data_dir);
  return td;
}

double run_once(const TaskData& task, ModelKind model, std::uint64_t run_seed,
                const GlgConfig& glg_cfg, std::vector<std::string>* warnings) {
  const SamplePolicy policy = policy_for(task.spec.code);
  LabeledDomain ds = permute_domain(task.source, mix_seed(run_seed, kStPermS));
  LabeledDomain dt = permute_domain(task.target, mix_seed(run_seed, kStPermT));
  ds = sample_for_run(ds, policy, mix_seed(run_seed, kStSampleS));
  dt = sample_for_run(dt, policy, mix_seed(run_seed, kStSampleT));

  const Mat xs = zscore(ds.X);
  const Mat xt = zscore(dt.X);

  std::vector<int> pred;
  if (model == ModelKind::A1) {
    pred.assign(dt.y.size(), 1);
  } else if (model == ModelKind::CM) {
    pred = kmeans2(xt, mix_seed(run_seed, kStKmeans));
  } else {
    const Eigen::Index r = std::min(xs.cols(), xt.cols());
    Mat as, at;
    if (model == ModelKind::GLG) {
      GlgConfig c = glg_cfg;
      c.seed = run_seed;
      AdaptResult res = adapt_glg(xs, xt, c);
      as = std::move(res.xs);
      at = std::move(res.xt);
      merge_warnings(warnings, res.trace.warnings);
      if (res.trace.terminal == "max_iter" && warnings != nullptr)
        merge_warnings(warnings, {"fit stopped at the iteration cap"});
    } else {
      Mat ms, mt;
      if (model == ModelKind::DG) {
        ms = pca_project(xs, r);
        mt = pca_project(xt, r);
      } else if (model == ModelKind::RMG) {
        ms = apply_lmm(xs, gaussian_map(r, xs.cols(), mix_seed(run_seed, kStRmgS)));
        mt = apply_lmm(xt, gaussian_map(r, xt.cols(), mix_seed(run_seed, kStRmgT)));
      } else {
        ms = apply_lmm(xs, random_lmm(r, xs.cols(), mix_seed(run_seed, kStRlgS)));
        mt = apply_lmm(xt, random_lmm(r, xt.cols(), mix_seed(run_seed, kStRlgT)));
      }
      ms = zscore(ms);
      mt = zscore(mt);
      const Eigen::Index d =
          glg_cfg.gfk_dim > 0 ? glg_cfg.gfk_dim : std::max<Eigen::Index>(1, r / 2);
      const GfkKernel kernel = gfk_kernel(ms, mt, d);
      as = gfk_embed(ms, kernel);
      at = gfk_embed(mt, kernel);
    }
    const double gamma = 1.0 / double(as.cols());
    const SvmModel svm = svm_train(as, ds.y, 1.0, gamma, 1e-3);
    pred = svm_predict(svm, at);
  }
  return 100.0 * accuracy(pred, dt.y);
}

TaskReport run_task(const TaskData& task, ModelKind model, const RunConfig& cfg) {
  TaskReport rep;
  rep.task = task.spec.code;
  rep.model = model_name(model);
  rep.runs = cfg.runs;
  for (int i = 0; i < cfg.runs; ++i) {
    const std::uint64_t run_seed = cfg.seed + std::uint64_t(i);
    rep.seeds.push_back(run_seed);
    rep.accuracies.push_back(run_once(task, model, run_seed, cfg.glg, &rep.warnings));
  }
  rep.avg = mean(rep.accuracies);
  rep.std_dev = sample_std(rep.accuracies);
  rep.max_acc = *std::max_element(rep.accuracies.begin(), rep.accuracies.end());
  rep.min_acc = *std::min_element(rep.accuracies.begin(), rep.accuracies.end());
  return rep;
}

std::string report_to_json(const TaskReport& rep, const RunConfig& cfg) {
  json j;
  j["task"] = rep.task;
  j["model"] = rep.model;
  j["runs"] = rep.runs;
  j["seeds"] = rep.seeds;
  j["accuracies"] = rep.accuracies;
  j["avg"] = rep.avg;
  j["std"] = rep.std_dev;
  j["max"] = rep.max_acc;
  j["min"] = rep.min_acc;
  j["warnings"] = rep.warnings;
  json cj;
  cj["runs"] = cfg.runs;
  cj["seed"] = cfg.seed;
  cj["data_dir"] = cfg.data_dir;
  cj["glg"] = glg_config_to_json(cfg.glg);
  j["config"] = cj;
  return j.dump(2) + "\n";
}

int run_all(const RunConfig& cfg, std::ostream& log) {
  std::vector<std::string> tasks = cfg.tasks;
  if (tasks.empty() || (tasks.size() == 1 && tasks[0] == "all")) {
    tasks.clear();
    for (const TaskSpec& t : task_registry()) tasks.push_back(t.code);
  }
  std::vector<ModelKind> models;
  if (cfg.models.empty() || (cfg.models.size() == 1 && cfg.models[0] == "all")) {
    models = all_models();
  } else {
    for (const std::string& name : cfg.models) models.push_back(parse_model(name));
  }
  require(!cfg.out_dir.empty(), ErrorKind::invalid_arg, "run_all: out_dir is required");
  std::filesystem::create_directories(cfg.out_dir);

  std::map<std::string, std::map<std::string, std::string>> cells;
  int failures = 0;
  for (const std::string& code : tasks) {
    bool loaded = false;
    TaskData td;
    try {
      td = load_task(code, cfg.data_dir);
      loaded = true;
    } catch (const Error& e) {
      log << code << ": load failed: " << e.what() << "\n";
      for (ModelKind m : models) {
        cells[code][model_name(m)] = "ERROR";
        ++failures;
      }
      continue;
    }
    (void)loaded;
    for (ModelKind m : models) {
      try {
        const TaskReport rep = run_task(td, m, cfg);
        const std::string path =
            cfg.out_dir + "/" + code + "_" + model_name(m) + ".json";
        std::ofstream out(path, std::ios::binary);
        require(bool(out), ErrorKind::data_missing, path + ": cannot write");
        out << report_to_json(rep, cfg);
        cells[code][model_name(m)] = format_cell(rep);
        log << code << " " << model_name(m) << ": " << format_cell(rep) << "\n";
      } catch (const Error& e) {
        cells[code][model_name(m)] = "ERROR";
        log << code << " " << model_name(m) << ": " << e.what() << "\n";
        ++failures;
      }
    }
  }

  std::ostringstream table;
  table << std::left << std::setw(10) << "task";
  for (ModelKind m : models) table << std::setw(26) << model_name(m);
  table << "\n";
  for (const std::string& code : tasks) {
    table << std::left << std::setw(10) << code;
    for (ModelKind m : models) table << std::setw(26) << cells[code][model_name(m)];
    table << "\n";
  }
  const std::string path = cfg.out_dir + "/summary.txt";
  std::ofstream out(path, std::ios::binary);
  require(bool(out), ErrorKind::data_missing, path + ": cannot write");
  out << table.str();
  log << "summary written to " << path << "\n";
  return failures;
}

std::string mmd_diagnostic(const std::string& task_code, std::uint64_t seed,
                           const RunConfig& cfg) {
  const TaskData task = load_task(task_code, cfg.data_dir);
  const SamplePolicy policy = policy_for(task.spec.code);
  LabeledDomain ds = permute_domain(task.source, mix_seed(seed, kStPermS));
  LabeledDomain dt = permute_domain(task.target, mix_seed(seed, kStPermT));
  ds = sample_for_run(ds, policy, mix_seed(seed, kStSampleS));
  dt = sample_for_run(dt, policy, mix_seed(seed, kStSampleT));
  const Mat xs = zscore(ds.X);
  const Mat xt = zscore(dt.X);

  GlgConfig c = cfg.glg;
  c.seed = seed;
  auto [maps, trace] = fit_glg(xs, xt, c);
  const Mat mapped_s = zscore(apply_lmm(xs, maps.Us));
  const Mat mapped_t = zscore(apply_lmm(xt, maps.Ut));

  const Eigen::Index r = maps.r();
  const Eigen::Index d = c.gfk_dim > 0 ? c.gfk_dim : std::max<Eigen::Index>(1, r / 2);
  const GfkKernel kernel = gfk_kernel(mapped_s, mapped_t, d);
  const Mat adapted_s = gfk_embed(mapped_s, kernel);
  const Mat adapted_t = gfk_embed(mapped_t, kernel);

  auto stage_json = [](const Mat& a, const Mat& b, std::uint64_t mmd_seed) {
    const double gamma = median_heuristic_gamma(a, b);
    const MmdResult res = mmd2_test(a, b, gamma, 1000, 0.05, mmd_seed);
    json j;
    j["statistic"] = res.statistic;
    j["p_value"] = res.p_value;
    j["gamma"] = res.gamma;
    j["same_distribution"] = res.same_distribution;
    return j;
  };

  json j;
  j["task"] = task_code;
  j["seed"] = seed;
  j["mapped"] = stage_json(mapped_s, mapped_t, mix_seed(seed, kStMmdMapped));
  j["adapted"] = stage_json(adapted_s, adapted_t, mix_seed(seed, kStMmdAdapted));
  return j.dump(2) + "\n";
}

}  // namespace glg
