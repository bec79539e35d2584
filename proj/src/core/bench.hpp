#pragma once

#include <iosfwd>

#include "core/datasets.hpp"
#include "core/glg_opt.hpp"

namespace glg {

enum class ModelKind { A1, CM, DG, RMG, RLG, GLG };

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind kind);
const std::vector<ModelKind>& all_models();

struct RunConfig {
  std::vector<std::string> tasks;   // task codes; empty means all
  std::vector<std::string> models;  // model names; empty means all
  int runs = 50;
  std::uint64_t seed = 7;
  std::string data_dir;
  std::string out_dir;
  GlgConfig glg;
};

RunConfig config_from_json_file(const std::string& path);

struct TaskReport {
  std::string task;
  std::string model;
  int runs = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;  // percent, one per run
  double avg = 0.0;
  double std_dev = 0.0;
  double max_acc = 0.0;
  double min_acc = 0.0;
  std::vector<std::string> warnings;
};

// Cached domains for one task so repeated runs share the load step.
struct TaskData {
  TaskSpec spec;
  LabeledDomain source;
  LabeledDomain target;
};
TaskData load_task(const std::string& task_code, const std::string& data_dir);

// One seeded run: permute, sample, standardize, adapt, transfer labels.
double run_once(const TaskData& task, ModelKind model, std::uint64_t run_seed,
                const GlgConfig& glg_cfg, std::vector<std::string>* warnings);

TaskReport run_task(const TaskData& task, ModelKind model, const RunConfig& cfg);

std::string report_to_json(const TaskReport& rep, const RunConfig& cfg);

// Runs every (task, model) cell, writing one JSON per cell plus a summary
// table. Returns the number of failed cells.
int run_all(const RunConfig& cfg, std::ostream& log);

// Distribution check before and after the geodesic embedding for one run.
std::string mmd_diagnostic(const std::string& task_code, std::uint64_t seed,
                           const RunConfig& cfg);

}  // namespace glg
