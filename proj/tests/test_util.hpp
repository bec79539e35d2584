#pragma once

#include <doctest.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/common.hpp"

namespace testutil {

inline glg::Mat random_matrix(glg::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                              double lo = -1.0, double hi = 1.0) {
  glg::Mat X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = rng.uniform(lo, hi);
  return X;
}

// Random orthonormal basis: QR of a Gaussian matrix.
inline glg::Mat random_orthonormal(glg::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  glg::Mat A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = rng.gaussian();
  Eigen::HouseholderQR<glg::Mat> qr(A);
  glg::Mat Q = qr.householderQ() * glg::Mat::Identity(rows, cols);
  return Q;
}

template <typename F>
void check_error(F&& f, glg::ErrorKind kind) {
  bool threw = false;
  try {
    f();
  } catch (const glg::Error& e) {
    threw = true;
    CHECK(e.kind() == kind);
  }
  CHECK(threw);
}

inline std::filesystem::path unique_temp_path(const std::string& hint) {
  static std::atomic<int> counter{0};
  return std::filesystem::temp_directory_path() /
         (hint + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
}

// A file in the system temp directory, removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& content, const std::string& hint = "glg_test") {
    path_ = unique_temp_path(hint);
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

// A directory in the system temp directory, removed recursively on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& hint = "glg_test_dir") {
    path_ = unique_temp_path(hint);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Benchmark data directory for tests that need the real datasets; empty when
// GLG_DATA_DIR is unset, in which case those cases skip themselves.
inline std::string data_dir_or_empty() {
  const char* env = std::getenv("GLG_DATA_DIR");
  return env != nullptr ? env : "";
}

}  // namespace testutil
