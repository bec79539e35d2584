#include "core/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glg {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<Eigen::Index> Rng::sample_without_replacement(Eigen::Index n, Eigen::Index k) {
  require(k >= 0 && k <= n, ErrorKind::invalid_arg, "sample_without_replacement: k exceeds n");
  std::vector<Eigen::Index> idx = iota_indices(n);
  for (Eigen::Index i = 0; i < k; ++i)
    std::swap(idx[std::size_t(i)], idx[std::size_t(i) + index(std::size_t(n - i))]);
  idx.resize(std::size_t(k));
  return idx;
}

std::vector<Eigen::Index> iota_indices(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return idx;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  // A constant list has zero deviation exactly; the accumulation below would
  // round the mean by an ulp and report noise instead.
  if (std::equal(v.begin() + 1, v.end(), v.begin())) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace glg
