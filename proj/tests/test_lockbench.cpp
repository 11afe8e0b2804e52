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

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "hjcp/lockbench.hpp"

using namespace hjcp;

TEST_CASE("slots stay in range and follow the seed") {
  for (unsigned skew : {0U, 10U, 25U}) {
    const auto s = lockbench_slots(100, 5000, skew, 3);
    REQUIRE(s.size() == 5000);
    CHECK(*std::max_element(s.begin(), s.end()) < 100);
    CHECK(s == lockbench_slots(100, 5000, skew, 3));
  }
  const auto one = lockbench_slots(1, 100, 0, 1);
  CHECK(std::all_of(one.begin(), one.end(), [](std::uint32_t v) { return v == 0; }));
}

TEST_CASE("distribution names") {
  CHECK(skew_name(0) == "uniform");
  CHECK(skew_name(10) == "low-skew");
  CHECK(skew_name(25) == "high-skew");
  CHECK(skew_name(40) == "s40");
}

TEST_CASE("increments are conserved and never torn") {
  for (std::size_t n : {1U, 64U, 4096U}) {
    for (std::size_t k : {1U, 16U, 1000U}) {
      LockBenchSpec spec;
      spec.n = n;
      spec.k = k;
      spec.x = 50000;
      spec.skew = 25;
      const LockBenchResult r = run_lockbench(spec);
      CHECK(r.total == spec.x);
      CHECK(r.torn == 0);
      CHECK(r.checks > 0);
      CHECK(r.os_threads == std::min<std::size_t>(k, 256));
    }
  }
}
