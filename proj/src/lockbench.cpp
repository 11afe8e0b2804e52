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

#include "hjcp/lockbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "hjcp/hashtable.hpp"

namespace hjcp {

namespace {

struct Counter {
  std::atomic<std::uint32_t> latch{0};
  std::atomic<std::uint32_t> lo{0};
  std::atomic<std::uint32_t> hi{0};
};

}  // namespace

std::string skew_name(unsigned skew) {
  if (skew == 0) return "uniform";
  if (skew == 10) return "low-skew";
  if (skew == 25) return "high-skew";
  return "s" + std::to_string(skew);
}

std::vector<std::uint32_t> lockbench_slots(std::size_t n, std::size_t x, unsigned skew,
                                           std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("lockbench needs at least one counter");
  const Relation keys = skew == 0 ? gen_uniform(x, KeyRange{0, n - 1}, seed) : gen_skewed(x, skew, seed);
  std::vector<std::uint32_t> slots(x);
  for (std::size_t i = 0; i < x; ++i) slots[i] = static_cast<std::uint32_t>(keys.keys[i] % n);
  return slots;
}

LockBenchResult run_lockbench(const LockBenchSpec& spec) {
  if (spec.n == 0 || spec.k == 0 || spec.x == 0) throw std::invalid_argument("N, K and X must be >= 1");
  const auto slots = lockbench_slots(spec.n, spec.x, spec.skew, spec.seed);
  std::vector<Counter> counters(spec.n);
  const std::size_t os = std::max<std::size_t>(1, std::min(spec.k, spec.max_os_threads));

  LockBenchResult res;
  res.n = spec.n;
  res.k = spec.k;
  res.x = spec.x;
  res.dist = skew_name(spec.skew);
  res.os_threads = os;

  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> torn{0}, checks{0};
  std::thread checker;
  if (spec.checker) {
    checker = std::thread([&] {
      SplitMix64 rng(spec.seed ^ 0x5eedULL);
      while (!stop.load(std::memory_order_relaxed)) {
        Counter& c = counters[rng.below(spec.n)];
        {
          SpinLatch l(c.latch);
          if (c.lo.load(std::memory_order_relaxed) != c.hi.load(std::memory_order_relaxed)) {
            torn.fetch_add(1, std::memory_order_relaxed);
          }
        }
        if (checks.fetch_add(1, std::memory_order_relaxed) % 256 == 255) std::this_thread::yield();
      }
    });
  }

  const auto t0 = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> pool;
    pool.reserve(os);
    for (std::size_t t = 0; t < os; ++t) {
      pool.emplace_back([&, t] {
        // Logical threads t, t + os, ... are run round-robin, one increment each.
        std::vector<std::size_t> next;
        for (std::size_t j = t; j < spec.k; j += os) next.push_back(j);
        for (bool any = true; any;) {
          any = false;
          for (auto& i : next) {
            if (i >= spec.x) continue;
            any = true;
            Counter& c = counters[slots[i]];
            SpinLatch l(c.latch);
            c.lo.store(c.lo.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
            c.hi.store(c.hi.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
            i += spec.k;
          }
        }
      });
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stop.store(true);
  if (checker.joinable()) checker.join();

  for (const auto& c : counters) {
    const std::uint32_t lo = c.lo.load(), hi = c.hi.load();
    if (lo != hi) torn.fetch_add(1);
    res.total += lo;
  }
  res.torn = torn.load();
  res.checks = checks.load();
  return res;
}

}  // namespace hjcp
