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
#include <string>
#include <vector>

#include "hjcp/relation.hpp"

namespace hjcp {

struct LockBenchSpec {
  std::size_t n = 1;           // counters
  std::size_t k = 256;         // logical threads
  std::size_t x = 1 << 20;     // total increments
  unsigned skew = 0;           // s percent; 0 = uniform
  std::uint64_t seed = 1;
  std::size_t max_os_threads = 256;
  bool checker = true;
};

struct LockBenchResult {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t x = 0;
  std::string dist;
  std::size_t os_threads = 0;
  std::uint64_t total = 0;        // sum of counters after the run
  std::uint64_t torn = 0;         // checker saw a half-done update
  std::uint64_t checks = 0;
  double seconds = 0.0;           // wall clock
};

// Slot of every increment, drawn with the relation generator's distributions.
std::vector<std::uint32_t> lockbench_slots(std::size_t n, std::size_t x, unsigned skew,
                                           std::uint64_t seed);

// K logical threads share at most max_os_threads OS threads; logical thread j
// performs increments j, j + K, j + 2K, ... Each increment takes the slot's
// latch and bumps two halves that a racing checker compares under the latch.
LockBenchResult run_lockbench(const LockBenchSpec& spec);

// "uniform", "low-skew" (10), "high-skew" (25) or "s<percent>".
std::string skew_name(unsigned skew);

}  // namespace hjcp
