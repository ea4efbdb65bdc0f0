#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace polarpref::testing {

/// Brute-force exact permutation p for mean(a) - mean(b): walks every bit
/// mask of the pooled sample with |a| bits set.
inline double brute_force_permutation_p(const std::vector<double>& a, const std::vector<double>& b, int tail = 0) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  auto stat = [&](std::uint32_t mask) {
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? sa : sb) += pooled[i];
    return sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
  };
  const std::uint32_t observed_mask = (1u << a.size()) - 1u;
  const double observed = stat(observed_mask);
  double scale = 1.0;
  for (double v : pooled) scale = std::fmax(scale, std::fabs(v));
  const double eps = 1e-10 * scale;
  std::size_t hits = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    ++total;
    const double s = stat(mask);
    bool hit = false;
    if (tail == 0) hit = std::fabs(s) >= std::fabs(observed) - eps;
    if (tail > 0) hit = s >= observed - eps;
    if (tail < 0) hit = s <= observed + eps;
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace polarpref::testing
