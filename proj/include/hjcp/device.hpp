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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "hjcp/relation.hpp"
#include "hjcp/steps.hpp"

namespace hjcp {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

class MissingCalibration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All per-item costs are aggregate device time (seconds per work unit with
// the whole device busy); a single lane takes worker_count times as long.
struct DeviceProfile {
  std::string name;
  std::string origin = "canned";
  unsigned worker_count = 1;
  unsigned wavefront_width = 1;
  double ipc = 1.0;
  double clock_hz = 1e9;
  std::array<double, kStepCount> instr_per_item{};
  std::array<double, kStepCount> mem_cost_per_item{};
  double atomic_cost = 0.0;  // one global-cursor operation

  DeviceProfile() {
    instr_per_item.fill(kUnset);
    mem_cost_per_item.fill(kUnset);
  }

  double slots() const { return static_cast<double>(worker_count) / wavefront_width; }
  bool has(StepId s) const {
    return !std::isnan(instr_per_item[index(s)]) && !std::isnan(mem_cost_per_item[index(s)]);
  }
  double instr(StepId s) const;
  double mem(StepId s) const;
  double compute_per_unit(StepId s) const { return instr(s) / (ipc * clock_hz); }
  double cost_per_unit(StepId s) const { return compute_per_unit(s) + mem(s); }
  double lane_cost(StepId s, double units) const { return worker_count * cost_per_unit(s) * units; }
  void validate() const;
};

struct TransferLink {
  double latency = 0.015e-3;
  double bandwidth = 3.0 * 1024 * 1024 * 1024;
  bool enabled = false;
};

// exactly latency + size/bandwidth; 0 on a disabled (coupled) link.
double transfer_time(const TransferLink& link, double bytes);

struct SystemParams {
  TransferLink link;
  double contention = 0.2;        // memory slowdown factor while both devices run
  double regroup_cost = 1.5e-9;   // per item, regrouping pass between p2 and p3
  double dispatch_cost = 2e-6;    // per chunk pulled from the shared queue
  double copy_bandwidth = 8.0 * (1ULL << 30);  // bytes/s, system memory <-> buffer
};

// Σ over width-W wavefronts (formed in input order) of the wavefront's max
// lane cost, divided by the worker_count / W concurrently running wavefronts.
double simulate_step(const DeviceProfile& profile, std::span<const double> lane_costs);

struct CannedProfiles {
  DeviceProfile cpu;
  DeviceProfile gpu;
};
CannedProfiles canned_profiles();

inline constexpr int kCalibrationRepetitions = 9;

enum class Measurement { Logical, Host };

struct CalibrationOptions {
  Measurement mode = Measurement::Logical;
  bool co_run = true;       // measure with the other device busy
  double contention = 0.3;
  std::size_t max_sample = 1 << 16;
};

// Re-derives a step's unit cost from a measurement over sample work units
// (one entry per item; B3/P3 units are key-list lengths). #I is kept and the
// remainder is attributed to memory stalls, so predicted cost = units x unit.
// Logical mode runs simulate_step on the true profile. Throws
// std::invalid_argument when the sample has fewer than k items.
DeviceProfile calibrate_units(const DeviceProfile& profile, StepId step,
                              std::span<const std::uint32_t> units, const CalibrationOptions& opt);

// Same, starting from a sample relation: the sample is joined with itself to
// obtain work units. Host mode times the real kernels (median of k runs).
DeviceProfile calibrate(const DeviceProfile& profile, StepId step, const Relation& sample,
                        const CalibrationOptions& opt);

struct ProfileSet {
  DeviceProfile cpu;
  DeviceProfile gpu;
  SystemParams system;
};

// Flat key=value text, keys prefixed with "cpu." / "gpu.", system keys bare.
void write_profiles(const std::filesystem::path& path, const ProfileSet& set);
ProfileSet read_profiles(const std::filesystem::path& path);
std::string format_profiles(const ProfileSet& set);
ProfileSet parse_profiles(const std::string& text, const ProfileSet& defaults);
ProfileSet default_profile_set();

}  // namespace hjcp
