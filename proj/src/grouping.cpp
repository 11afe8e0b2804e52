/*
 * Copyright 2026 The hjcp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hjcp/grouping.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hjcp {

std::vector<std::uint32_t> group_by_workload(std::span<const std::uint32_t> measure, unsigned g) {
  if (g == 0) throw std::invalid_argument("group count must be at least 1");
  std::vector<std::uint32_t> order(measure.size());
  if (g == 1 || measure.empty()) {
    std::iota(order.begin(), order.end(), 0U);
    return order;
  }
  const auto [lo_it, hi_it] = std::minmax_element(measure.begin(), measure.end());
  const std::uint64_t lo = *lo_it;
  const std::uint64_t span = std::uint64_t{*hi_it} - lo + 1;
  auto cls = [&](std::uint32_t m) -> std::size_t {
    const std::uint64_t d = m - lo;
    return span <= g ? d : static_cast<std::size_t>(d * g / span);
  };
  const std::size_t classes = span <= g ? static_cast<std::size_t>(span) : g;
  std::vector<std::size_t> start(classes + 1, 0);
  for (auto m : measure) ++start[cls(m) + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  for (std::size_t i = 0; i < measure.size(); ++i) {
    order[start[cls(measure[i])]++] = static_cast<std::uint32_t>(i);
  }
  return order;
}

double divergence(std::span<const double> costs, std::size_t width) {
  if (width == 0) throw std::invalid_argument("wavefront width must be positive");
  double total = 0.0;
  for (std::size_t a = 0; a < costs.size(); a += width) {
    const std::size_t b = std::min(costs.size(), a + width);
    double mx = 0.0, sum = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      mx = std::max(mx, costs[i]);
      sum += costs[i];
    }
    total += mx - sum / static_cast<double>(b - a);
  }
  return total;
}

double divergence(std::span<const std::uint32_t> units, std::size_t width) {
  std::vector<double> c(units.begin(), units.end());
  return divergence(c, width);
}

}  // namespace hjcp
