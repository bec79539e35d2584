#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "glg/glg.h"

namespace {

std::string default_data_dir() {
  const char* env = std::getenv("GLG_DATA_DIR");
  return env != nullptr ? env : "data";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(2);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

int report_status(glg_status status) {
  if (status == GLG_OK) return 0;
  std::cerr << "error: " << glg_last_error() << "\n";
  return int(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous domain adaptation benchmark"};
  app.require_subcommand(1);

  // prepare
  std::string prep_data_dir = default_data_dir();
  bool no_verify = false;
  CLI::App* prepare = app.add_subcommand("prepare", "Check the benchmark data directory");
  prepare->add_option("--data-dir", prep_data_dir, "Directory holding the dataset files")
      ->capture_default_str();
  prepare->add_flag("--no-verify", no_verify,
                    "Skip checksum verification (keeps presence and parse checks)");

  // run
  std::string run_task_code, run_model = "glg", run_data_dir = default_data_dir();
  std::string run_out, run_config;
  int runs = 50;
  std::uint64_t seed = 7;
  CLI::App* run = app.add_subcommand("run", "Run one task with one model");
  run->add_option("--task", run_task_code, "Task code, e.g. CD2CO")->required();
  run->add_option("--model", run_model, "Model: a1, cm, dg, rmg, rlg or glg")
      ->capture_default_str();
  run->add_option("--runs", runs, "Number of seeded repetitions")->capture_default_str();
  run->add_option("--seed", seed, "Base seed; run i uses seed + i")->capture_default_str();
  run->add_option("--data-dir", run_data_dir, "Directory holding the dataset files")
      ->capture_default_str();
  run->add_option("--out", run_out, "Path for the JSON report (stdout when omitted)");
  run->add_option("--config", run_config, "JSON file with fit parameter overrides");

  // run-all
  std::string all_config;
  CLI::App* run_all = app.add_subcommand("run-all", "Run every cell of a benchmark config");
  run_all->add_option("--config", all_config, "JSON run configuration file")->required();

  // mmd
  std::string mmd_task, mmd_data_dir = default_data_dir();
  std::uint64_t mmd_seed = 7;
  CLI::App* mmd = app.add_subcommand("mmd", "Distribution check before and after embedding");
  mmd->add_option("--task", mmd_task, "Task code, e.g. CD2CO")->required();
  mmd->add_option("--seed", mmd_seed, "Run seed")->capture_default_str();
  mmd->add_option("--data-dir", mmd_data_dir, "Directory holding the dataset files")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (prepare->parsed()) {
    char* report = nullptr;
    const glg_status status = glg_prepare(prep_data_dir.c_str(), no_verify ? 0 : 1, &report);
    if (report != nullptr) {
      std::cout << report;
      glg_string_destroy(report);
    }
    return report_status(status);
  }

  if (run->parsed()) {
    std::string config_json;
    if (!run_config.empty()) config_json = read_file(run_config);
    char* report = nullptr;
    const glg_status status =
        glg_run_task(run_task_code.c_str(), run_model.c_str(), runs, seed,
                     run_data_dir.c_str(), config_json.empty() ? nullptr : config_json.c_str(),
                     &report);
    if (status != GLG_OK) return report_status(status);
    if (run_out.empty()) {
      std::cout << report;
    } else if (!write_file(run_out, report)) {
      std::cerr << "error: cannot write " << run_out << "\n";
      glg_string_destroy(report);
      return 2;
    }
    glg_string_destroy(report);
    return 0;
  }

  if (run_all->parsed()) {
    char* summary = nullptr;
    const glg_status status = glg_run_all(all_config.c_str(), &summary);
    if (summary != nullptr) {
      std::cout << summary;
      glg_string_destroy(summary);
    }
    return report_status(status);
  }

  if (mmd->parsed()) {
    char* report = nullptr;
    const glg_status status =
        glg_mmd(mmd_task.c_str(), mmd_seed, mmd_data_dir.c_str(), &report);
    if (status != GLG_OK) return report_status(status);
    std::cout << report;
    glg_string_destroy(report);
    return 0;
  }

  return 0;
}
