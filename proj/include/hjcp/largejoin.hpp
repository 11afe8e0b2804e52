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
#include <stdexcept>

#include "hjcp/device.hpp"
#include "hjcp/kernels.hpp"
#include "hjcp/scheduler.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

class BufferOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LargeJoinOptions {
  std::size_t buffer_bytes = 512ULL << 20;
  std::size_t chunk_tuples = 16ULL << 20;  // upper bound; shrunk to fit the buffer
  unsigned pass_bits = 6;                  // radix bits per external pass
  unsigned max_passes = 2;
  EngineConfig pair_cfg;                   // join of each partition pair
  Scheme scheme = Scheme::PL;
  SearchOptions search;
};

struct LargeJoinReport {
  JoinResult result;
  bool in_buffer = false;
  unsigned bits = 0;  // external radix bits
  unsigned passes = 0;
  std::size_t chunk_tuples = 0;
  std::size_t chunks = 0;
  std::size_t pairs = 0;
  std::size_t spilled_bytes = 0;
  double copy_time = 0.0;  // logical seconds
  double partition_time = 0.0;
  double join_time = 0.0;
  double total() const { return copy_time + partition_time + join_time; }
};

// Bytes an in-buffer join of |R| x |S| needs (inputs plus the table arena).
std::size_t join_footprint(std::size_t r_size, std::size_t s_size, std::size_t block_size);

// External-memory hash join: inputs are partitioned chunk by chunk inside the
// buffer, fragments are copied out and linked per partition, then every
// partition pair is joined in the buffer by the engine.
LargeJoinReport large_join(const Relation& r, const Relation& s, const ProfileSet& truth,
                           const LargeJoinOptions& opt);

}  // namespace hjcp
