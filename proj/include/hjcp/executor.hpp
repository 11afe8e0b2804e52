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

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hjcp/kernels.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

class HandoffDeadlock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExecTask {
  int step = 0;  // position in the series; -1 runs every step on the range
  std::size_t a = 0;
  std::size_t b = 0;
};
using DeviceTasks = std::array<std::vector<ExecTask>, 2>;

// How one phase's items are spread over the devices. Either per-step CPU
// prefixes (splits) or a device per chunk (chunk_owner, dynamic pulls).
struct PhaseAssignment {
  std::vector<std::size_t> splits;
  std::vector<std::uint8_t> chunk_owner;
  std::size_t chunk = 0;
};

DeviceTasks make_tasks(const PhaseAssignment& asg, std::size_t x, std::size_t nsteps);

class PhaseRunner {
 public:
  virtual ~PhaseRunner() = default;
  virtual std::size_t nsteps() const = 0;
  virtual std::size_t items() const = 0;
  virtual void run(std::size_t step_pos, DeviceLocal& dev, std::size_t a, std::size_t b) = 0;
};

// Runs two device executor threads over their task lists. A task at step i
// waits until step i-1 has produced its items; with handoff_cap > 0 a
// producer also waits while that many of its items are still unconsumed by
// the other device. A state where both devices wait is reported as
// HandoffDeadlock. Granule is the dependency tracking unit in items.
void execute_phase(PhaseRunner& runner, const DeviceTasks& tasks, std::size_t granule,
                   std::size_t handoff_cap, std::array<DeviceLocal*, 2> devs);

struct FunctionalRun {
  JoinResult result;
  std::uint64_t cursor_ops = 0;
  PartitionedPair partitions;  // PHJ: what the engine's own passes produced
};

// Executes the scheme's phases for real on the two executor threads.
FunctionalRun run_functional(const Workload& w, Scheme scheme,
                             const std::vector<PhaseAssignment>& asg, std::size_t granule);

}  // namespace hjcp
