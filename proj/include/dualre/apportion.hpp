#pragma once

#include <vector>

namespace dualre {

// Largest-remainder apportionment of `total` seats over fractional quotas.
// Each count is floor(quota) or ceil(quota); counts sum to `total`.
// Remainder ties go to the lower index. Requires
// sum(floor(quota)) <= total <= sum(ceil(quota)).
std::vector<int> apportion_largest_remainder(const std::vector<double>& quotas, int total);

}  // namespace dualre
