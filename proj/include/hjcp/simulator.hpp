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
#include <span>
#include <string>
#include <vector>

#include "hjcp/costmodel.hpp"
#include "hjcp/device.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

// Logical time of one device within a phase. end = busy + transfer + stall.
struct DeviceTiming {
  std::vector<double> step_busy;
  double transfer = 0.0;
  double stall = 0.0;
  double end = 0.0;
  double lock = 0.0;  // allocator cursor-operation time inside step_busy
  std::size_t items = 0;

  double busy() const {
    double b = 0.0;
    for (double v : step_busy) b += v;
    return b;
  }
  double total() const { return busy() + transfer + stall; }
};

struct PhaseTiming {
  std::string name;
  std::array<DeviceTiming, 2> dev;
  double merge = 0.0;
  double post_transfer = 0.0;
  double regroup = 0.0;
  std::vector<std::uint8_t> chunk_owner;  // dynamic scheduling: device per chunk
  std::size_t chunk_items = 0;

  double T() const { return std::max(dev[0].end, dev[1].end); }
  double post() const { return merge + post_transfer + regroup; }
  double total() const { return T() + post(); }
  double transfer() const { return dev[0].transfer + dev[1].transfer + post_transfer; }
};

struct SimOptions {
  Arch arch = Arch::Coupled;
  TableMode table_mode = TableMode::Shared;
  std::size_t block_size = kDefaultBlockSize;
  std::size_t chunk_items = 0;  // 0 = automatic
};

// Items are grouped in granules of G (a multiple of 64 and of both wavefront
// widths); device splits and chunks fall on granule boundaries.
std::size_t granule_for(const ProfileSet& truth);
std::size_t default_chunk(std::size_t x, std::size_t granule);
// CPU item count for ratio r: r*x rounded to a granule, clamped to x.
std::size_t split_point(double r, std::size_t x, std::size_t granule);

// Two-device fluid discrete-event simulation of a phase. Per-item costs come
// from the true profiles and the phase's work units; wavefronts cost their
// slowest item; memory time stretches by the contention factor while both
// devices compute at once.
class PhaseSimulator {
 public:
  PhaseSimulator(const PhaseData& ph, const ProfileSet& truth, const SimOptions& opt);

  // Contiguous-prefix split: the CPU takes the first split_point(r_i) items
  // of step i, each device walks its items in ascending order.
  PhaseTiming run_static(std::span<const double> r) const;
  // Shared chunk queue; an idle device pulls the next chunk and runs every
  // step on it. Ties go to the CPU.
  PhaseTiming run_dynamic(std::size_t chunk_items) const;

  std::size_t granule() const { return granule_; }
  std::size_t chunk() const { return chunk_; }
  const PhaseData& phase() const { return *ph_; }

  // Device time of items [a, b) at step position i when running alone.
  double cost(int d, std::size_t i, std::size_t a, std::size_t b, double* mem = nullptr) const;

 private:
  struct Task {
    int step = -1;  // -1: every step of the series
    std::size_t a = 0;
    std::size_t b = 0;
  };
  PhaseTiming run(std::array<std::vector<Task>, 2>* fixed, std::size_t dyn_chunk,
                  std::span<const std::size_t> splits) const;
  double merge_cost(std::size_t a, std::size_t b) const;
  double pairs(std::size_t a, std::size_t b) const;

  const PhaseData* ph_;
  ProfileSet truth_;
  SimOptions opt_;
  std::size_t granule_;
  std::size_t chunk_;
  std::size_t nblocks_;
  // [device][step] prefix sums over granules
  std::array<std::vector<std::vector<double>>, 2> cost_prefix_;
  std::array<std::vector<std::vector<double>>, 2> mem_prefix_;
  std::array<std::vector<std::vector<double>>, 2> lock_prefix_;
  std::vector<double> merge_prefix_;
  std::vector<double> pairs_prefix_;
  std::vector<double> tuples_prefix_;
};

}  // namespace hjcp
