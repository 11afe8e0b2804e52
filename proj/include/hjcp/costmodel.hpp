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
#include <span>
#include <vector>

#include "hjcp/device.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

inline constexpr int kCpu = 0;
inline constexpr int kGpu = 1;

// C = #I * share * x * units / (IPC * clock).
double comp_time(const DeviceProfile& d, StepId s, double share, double x, double avg_units = 1.0);
// M = unit memory cost * share * x * units.
double mem_time(const DeviceProfile& d, StepId s, double share, double x, double avg_units = 1.0);

struct Delay {
  double cpu = 0.0;
  double gpu = 0.0;
};

// Eqs. 4-5. sum_*_prev are the partial sums up to step i-1 (delays included),
// t_gpu_prev the GPU's step i-1 time, t_*_i step i's time without its delay.
Delay pipe_delay(double r_prev, double r, double sum_cpu_prev, double sum_gpu_prev,
                 double t_gpu_prev, double t_cpu_i, double t_gpu_i);

double intermediate_items(double r_prev, double r, double x);

// What a phase moves over the discrete link and does after its barrier,
// given how many items the GPU-like device takes at each step.
struct PhaseOverheads {
  double gpu_prologue = 0.0;   // seconds, before the GPU's first item
  double post_transfer = 0.0;  // seconds, after the barrier
  double regroup = 0.0;
};
struct GpuShare {
  std::array<double, 8> items{};  // per step position
  double pairs = 0.0;             // join output produced on the GPU
  double tuples = 0.0;            // coarse phase: input tuples of GPU pairs
};
PhaseOverheads phase_overheads(const PhaseData& ph, const GpuShare& g, const SystemParams& sys,
                               Arch arch);

// Calibrated profiles for one phase (costs already include the average work
// units when a phase needs that, e.g. the coarse pair step).
struct PhaseModel {
  const PhaseData* phase = nullptr;
  DeviceProfile cpu;
  DeviceProfile gpu;
  SystemParams system;
  Arch arch = Arch::Coupled;
  TableMode table_mode = TableMode::Shared;

  const DeviceProfile& dev(int d) const { return d == kCpu ? cpu : gpu; }
};

struct StepComponents {
  double C = 0.0;
  double M = 0.0;
  double D = 0.0;
  double X = 0.0;  // discrete-link transfer paid by the consuming device
  double sum() const { return C + M + D + X; }
};

struct CostEstimate {
  double T = 0.0;
  double T_cpu = 0.0;
  double T_gpu = 0.0;
  std::vector<std::array<StepComponents, 2>> steps;
  std::vector<double> intermediate;  // items handed over before each step
  double merge = 0.0;
  double post_transfer = 0.0;
  double regroup = 0.0;

  double post() const { return merge + post_transfer + regroup; }
  double total() const { return T + post(); }
};

CostEstimate predict(const PhaseModel& m, std::span<const double> r);
// Lower bound on T over every completion of the ratio prefix: the partial
// sums so far plus the least work the remaining steps can add.
double prefix_bound(const PhaseModel& m, std::span<const double> r);

struct PlanEstimate {
  std::vector<CostEstimate> phases;
  double total() const {
    double t = 0.0;
    for (const auto& p : phases) t += p.total();
    return t;
  }
};

// Per-phase calibration from the workload's own units (logical measurement).
PhaseModel calibrate_phase(const PhaseData& ph, const ProfileSet& truth, Arch arch, TableMode mode,
                           std::size_t max_sample = 1 << 16);

// Device cost of one coarse item (partition pair) from its summed units.
double coarse_item_cost(const DeviceProfile& d, const std::array<float, kStepCount>& units,
                        double* mem_part = nullptr);

}  // namespace hjcp
