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
#include <string>
#include <vector>

#include "hjcp/allocator.hpp"
#include "hjcp/hashtable.hpp"
#include "hjcp/partition.hpp"
#include "hjcp/relation.hpp"
#include "hjcp/steps.hpp"

namespace hjcp {

enum class Algo { SHJ, PHJ };
enum class Arch { Coupled, Discrete };
enum class Scheme { CpuOnly, GpuOnly, OL, DD, PL, BasicUnit, CoarsePL };

std::string to_string(Algo a);
std::string to_string(Arch a);
std::string to_string(Scheme s);
std::string to_string(TableMode m);

struct EngineConfig {
  Algo algo = Algo::SHJ;
  Arch arch = Arch::Coupled;
  TableMode table_mode = TableMode::Shared;
  std::size_t block_size = kDefaultBlockSize;
  unsigned groups = 1;
  unsigned pass_bits = 6;
  unsigned passes = 2;
  std::uint32_t seed = kDefaultHashSeed;
  std::size_t handoff_cap = 0;  // outstanding cross-device items, 0 = unbounded
  std::size_t chunk_items = 0;  // 0 = automatic

  // The emulated discrete link has no shared address space.
  TableMode effective_table_mode() const {
    return arch == Arch::Discrete ? TableMode::Separate : table_mode;
  }
  unsigned radix_bits() const { return algo == Algo::PHJ ? pass_bits * passes : 0; }
};

// Plan-independent statistics the cost model is allowed to see.
struct PhaseStats {
  std::array<double, 8> avg_units{};  // per step position
  double pairs_per_item = 0.0;        // join output per probe item
  double header_bytes = 0.0;          // bucket header array
  double node_bytes = 0.0;            // key + rid nodes of the full table
  double new_key_fraction = 0.0;      // build items that create a key node
};

// One barrier-delimited step series with per-item work units.
struct PhaseData {
  StepSeries series;
  std::vector<std::vector<std::uint32_t>> units;  // per step position; empty = all 1
  std::vector<std::uint8_t> new_key;              // build phases: item creates a key node
  std::vector<std::uint32_t> pairs;               // probe tail: output pairs per item
  // Coarse phase only: per item (partition pair) the summed units of every
  // fine step, so a device's cost is the dot product with its unit costs.
  std::vector<std::array<float, kStepCount>> coarse_units;
  PhaseStats stats;

  std::size_t x() const { return series.x; }
  std::size_t nsteps() const { return series.steps.size(); }
  std::uint32_t unit(std::size_t step_pos, std::size_t item) const {
    const auto& u = units[step_pos];
    return u.empty() ? 1U : u[item];
  }
};

struct Workload {
  EngineConfig cfg;
  const Relation* r = nullptr;
  const Relation* s = nullptr;
  PartitionedPair parts;  // PHJ: final partitioned inputs
  std::vector<PhaseData> fine;
  PhaseData coarse;  // PHJ only: partition-pair SHJ as one schedulable step
  std::vector<std::uint32_t> probe_order;  // grouped tail order (tuple indices)
  std::size_t matches = 0;
  std::size_t num_buckets = 0;
  std::size_t partitions = 1;

  // Phases executed by a scheme, in order.
  std::vector<const PhaseData*> schedule(Scheme scheme) const;
  const Relation& build_input() const { return cfg.algo == Algo::PHJ ? parts.r.tuples : *r; }
  const Relation& probe_input() const { return cfg.algo == Algo::PHJ ? parts.s.tuples : *s; }
};

// Runs the serial reference path once to derive every phase's work units.
// The inputs must outlive the workload.
Workload prepare(const Relation& r, const Relation& s, const EngineConfig& cfg);

// One N1..N3 pass over x items (all units 1).
PhaseData partition_phase(std::size_t x, unsigned pass);

std::size_t bucket_count_for(std::size_t build_size, unsigned radix_bits);

}  // namespace hjcp
