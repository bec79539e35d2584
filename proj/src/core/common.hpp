#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace glg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class ErrorKind {
  dim_mismatch,
  index_range,
  degenerate,
  invalid_arg,
  parse,
  data_missing,
  single_class,
  not_psd,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

// splitmix64; used to derive independent stream seeds from (seed, stage) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stage);

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the standard;
// the distributions here are hand-rolled because the std distribution objects
// are not guaranteed to produce identical streams across library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  // Uniform on [0, 1).
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  // Standard normal via Box-Muller, one spare cached.
  double gaussian();

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

  // k distinct indices drawn from [0, n), order randomized.
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::vector<Eigen::Index> iota_indices(Eigen::Index n);

// Sample standard deviation (n-1 denominator), 0 for fewer than two values.
double sample_std(const std::vector<double>& v);
double mean(const std::vector<double>& v);

}  // namespace glg
