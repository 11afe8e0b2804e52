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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hjcp {

// Stable counting sort of items into g workload classes. When the measure
// spans at most g distinct values each value is its own class; otherwise the
// classes are equal-width ranges over [min, max]. Returns item indices in the
// new order.
std::vector<std::uint32_t> group_by_workload(std::span<const std::uint32_t> measure, unsigned g);

// Sum over consecutive width-W wavefronts of (max - mean) of item costs.
double divergence(std::span<const double> costs, std::size_t width);
double divergence(std::span<const std::uint32_t> units, std::size_t width);

}  // namespace hjcp
