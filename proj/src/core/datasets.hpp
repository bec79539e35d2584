#pragma once

#include <map>
#include <optional>

#include "core/common.hpp"

namespace glg {

// A loaded domain: instances by rows, ±1 labels, and load notes (dropped
// rows, applied reductions).
struct LabeledDomain {
  std::string name;
  Mat X;
  std::vector<int> y;
  std::vector<std::string> notes;
};

// One benchmark task: adapt source to target and transfer labels.
struct TaskSpec {
  std::string code;          // e.g. "CD2CO"
  std::string source_name;   // registry key of the source domain
  std::string target_name;   // registry key of the target domain
  std::string positive_meaning;
};

// All tasks in report order.
const std::vector<TaskSpec>& task_registry();
const TaskSpec& find_task(const std::string& code);

// Expected data files with their checksums.
struct DataFile {
  std::string filename;
  std::string sha256;
  bool optional = false;
  std::string source_url;
};
const std::vector<DataFile>& expected_files();

// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::string& path);

// Per-file verification outcome for the prepare flow.
struct FileStatus {
  std::string filename;
  bool present = false;
  bool checksum_ok = false;
  bool parsed_ok = false;
  bool optional = false;
  std::string detail;
};
std::vector<FileStatus> verify_data_dir(const std::string& data_dir, bool verify_checksums);

// Loads a domain by registry name ("German Credit", "Breast Cancer Wisconsin
// (Original)", "OrgsPeople", ...) from files under data_dir.
LabeledDomain load_domain(const std::string& name, const std::string& data_dir);

// Generic delimited numeric loader used by the per-dataset loaders.
struct CsvSpec {
  char delimiter = ',';            // ' ' means any whitespace run
  Eigen::Index columns = 0;        // expected column count
  Eigen::Index label_col = 0;
  std::vector<Eigen::Index> drop_cols;
  std::map<std::string, int> label_map;
  std::string missing_token = "?";
  bool drop_missing_rows = false;
};
LabeledDomain load_delimited(const std::string& path, const CsvSpec& spec);

// Sparse "label index:value" rows (1-based indices) with a fixed dimension.
LabeledDomain load_sparse(const std::string& path, Eigen::Index dim,
                          const std::map<std::string, int>& label_map);

// Projects instances onto the top ceil(fraction * rank) right singular
// directions; used to compress very wide text domains.
Mat svd_reduce(const Mat& X, double fraction);

// Draws exactly n/2 instances per class without replacement (n even).
LabeledDomain sample_unbiased(const LabeledDomain& d, Eigen::Index n, std::uint64_t seed);

// Random row and feature permutation; labels follow their rows.
LabeledDomain permute_domain(const LabeledDomain& d, std::uint64_t seed);

}  // namespace glg
