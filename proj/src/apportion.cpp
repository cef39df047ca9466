#include "dualre/apportion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dualre {

std::vector<int> apportion_largest_remainder(const std::vector<double>& quotas, int total) {
  const int n = static_cast<int>(quotas.size());
  std::vector<int> counts(n, 0);
  std::vector<double> remainders(n, 0.0);
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    if (quotas[i] < 0.0) throw std::invalid_argument("apportion: negative quota");
    counts[i] = static_cast<int>(std::floor(quotas[i]));
    remainders[i] = quotas[i] - counts[i];
    assigned += counts[i];
  }
  int leftover = total - assigned;
  if (leftover < 0)
    throw std::invalid_argument("apportion: total below sum of floors");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainders[a] > remainders[b];
  });
  for (int i = 0; i < n && leftover > 0; ++i) {
    if (remainders[order[i]] <= 0.0) break;  // would exceed ceil(quota)
    ++counts[order[i]];
    --leftover;
  }
  if (leftover > 0)
    throw std::invalid_argument("apportion: total above sum of ceilings");
  return counts;
}

}  // namespace dualre
