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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hjcp {

enum class StepId : std::uint8_t { B1, B2, B3, B4, P1, P2, P3, P4, N1, N2, N3, J };
inline constexpr std::size_t kStepCount = 12;

// J is the coarse unit used by the partition-pair scheduler: one whole SHJ
// over a partition pair.
inline constexpr std::array<std::string_view, kStepCount> kStepNames = {
    "b1", "b2", "b3", "b4", "p1", "p2", "p3", "p4", "n1", "n2", "n3", "j"};

constexpr std::size_t index(StepId s) { return static_cast<std::size_t>(s); }
constexpr std::string_view step_name(StepId s) { return kStepNames[index(s)]; }
std::optional<StepId> parse_step(std::string_view name);

inline const std::vector<StepId> kBuildSeries = {StepId::B1, StepId::B2, StepId::B3, StepId::B4};
inline const std::vector<StepId> kProbeSeries = {StepId::P1, StepId::P2, StepId::P3, StepId::P4};
inline const std::vector<StepId> kPartitionSeries = {StepId::N1, StepId::N2, StepId::N3};

// Bytes one item may request from the allocator at this step.
constexpr std::size_t alloc_bytes(StepId s) {
  switch (s) {
    case StepId::B3: return 16;
    case StepId::B4: return 8;
    case StepId::N3: return 8;
    default: return 0;
  }
}

// Width of the item handed from a step to the next one.
inline constexpr std::size_t kIntermediateBytes = 8;

enum class PhaseKind { Partition, Build, Probe, ProbeHead, ProbeTail, Coarse };

struct StepSeries {
  std::string name;
  PhaseKind kind = PhaseKind::Build;
  std::vector<StepId> steps;
  std::size_t x = 0;
  bool barrier_after = true;
};

}  // namespace hjcp
