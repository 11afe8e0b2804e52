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

#include "hjcp/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hjcp {

double comp_time(const DeviceProfile& d, StepId s, double share, double x, double avg_units) {
  if (share == 0.0) return 0.0;
  return d.instr(s) * share * x * avg_units / (d.ipc * d.clock_hz);
}

double mem_time(const DeviceProfile& d, StepId s, double share, double x, double avg_units) {
  if (share == 0.0) return 0.0;
  return d.mem(s) * share * x * avg_units;
}

Delay pipe_delay(double r_prev, double r, double sum_cpu_prev, double sum_gpu_prev,
                 double t_gpu_prev, double t_cpu_i, double t_gpu_i) {
  Delay d;
  if (r > r_prev) {
    // A GPU that did nothing at step i-1 leaves no unpipelined fraction.
    const double frac = r_prev < 1.0 ? (1.0 - r) / (1.0 - r_prev) : 0.0;
    d.cpu = std::max(0.0, (sum_gpu_prev - t_gpu_prev * frac) - (sum_cpu_prev + t_cpu_i));
  } else if (r < r_prev) {
    const double frac = r < 1.0 ? (1.0 - r_prev) / (1.0 - r) : 0.0;
    d.gpu = std::max(0.0, sum_cpu_prev - (sum_gpu_prev + t_gpu_i * (1.0 - frac)));
  }
  return d;
}

double intermediate_items(double r_prev, double r, double x) { return std::fabs(r - r_prev) * x; }

PhaseOverheads phase_overheads(const PhaseData& ph, const GpuShare& g, const SystemParams& sys,
                               Arch arch) {
  PhaseOverheads o;
  if (ph.series.kind == PhaseKind::ProbeHead) o.regroup = sys.regroup_cost * static_cast<double>(ph.x());
  if (arch != Arch::Discrete) return o;
  TransferLink link = sys.link;
  link.enabled = true;
  const auto& st = ph.stats;
  const auto& it = g.items;
  double pro = 0.0, post = 0.0;
  switch (ph.series.kind) {
    case PhaseKind::Partition:
      pro = it[0] * kIntermediateBytes;
      post = it[2] * kIntermediateBytes;
      break;
    case PhaseKind::Build:
      pro = it[0] * kIntermediateBytes;
      if (it[2] > 0) post = st.header_bytes + it[2] * (16.0 * st.new_key_fraction + 8.0);
      break;
    case PhaseKind::Probe:
      pro = it[0] * kIntermediateBytes + (it[1] > 0 ? st.header_bytes : 0.0) +
            (it[2] > 0 || it[3] > 0 ? st.node_bytes : 0.0);
      post = g.pairs * sizeof(std::uint64_t);
      break;
    case PhaseKind::ProbeHead:
      pro = it[0] * kIntermediateBytes + (it[1] > 0 ? st.header_bytes : 0.0);
      break;
    case PhaseKind::ProbeTail:
      pro = it[0] * kIntermediateBytes + (it[0] > 0 || it[1] > 0 ? st.node_bytes : 0.0);
      post = g.pairs * sizeof(std::uint64_t);
      break;
    case PhaseKind::Coarse:
      pro = g.tuples * kIntermediateBytes;
      post = g.pairs * sizeof(std::uint64_t);
      break;
  }
  if (pro > 0) o.gpu_prologue = transfer_time(link, pro);
  if (post > 0) o.post_transfer = transfer_time(link, post);
  return o;
}

namespace {

void check_ratios(std::span<const double> r) {
  for (double v : r) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ratios must lie in [0, 1]");
  }
}

// GPU share for the first r.size() steps; later steps count as CPU-only.
PhaseOverheads overheads_for(const PhaseModel& m, std::span<const double> r) {
  const PhaseData& ph = *m.phase;
  const std::size_t n = ph.nsteps();
  const double x = static_cast<double>(ph.x());
  GpuShare share;
  for (std::size_t i = 0; i < r.size(); ++i) share.items[i] = (1.0 - r[i]) * x;
  if (r.size() == n) share.pairs = (1.0 - r[n - 1]) * x * ph.stats.pairs_per_item;
  if (ph.series.kind == PhaseKind::Coarse && !r.empty()) {
    double tuples = 0.0;
    for (const auto& cu : ph.coarse_units) tuples += cu[index(StepId::B1)] + cu[index(StepId::P1)];
    share.tuples = (1.0 - r[0]) * tuples;
  }
  return phase_overheads(ph, share, m.system, m.arch);
}

// Walks the first r.size() steps; returns the two partial sums.
std::pair<double, double> walk(const PhaseModel& m, std::span<const double> r, double prologue,
                               CostEstimate* e) {
  const PhaseData& ph = *m.phase;
  const double x = static_cast<double>(ph.x());
  TransferLink link = m.system.link;
  link.enabled = m.arch == Arch::Discrete;
  double sum_cpu = 0.0, sum_gpu = 0.0, t_gpu_prev = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const StepId s = ph.series.steps[i];
    const double u = ph.stats.avg_units[i];
    std::array<StepComponents, 2> sc{};
    sc[kCpu].C = comp_time(m.cpu, s, r[i], x, u);
    sc[kCpu].M = mem_time(m.cpu, s, r[i], x, u);
    sc[kGpu].C = comp_time(m.gpu, s, 1.0 - r[i], x, u);
    sc[kGpu].M = mem_time(m.gpu, s, 1.0 - r[i], x, u);
    double inter = 0.0;
    if (i == 0) {
      sc[kGpu].X += prologue;
    } else {
      inter = intermediate_items(r[i - 1], r[i], x);
      if (link.enabled && inter > 0) {
        sc[r[i] > r[i - 1] ? kCpu : kGpu].X += transfer_time(link, inter * kIntermediateBytes);
      }
    }
    const double t_cpu_i = sc[kCpu].C + sc[kCpu].M + sc[kCpu].X;
    const double t_gpu_i = sc[kGpu].C + sc[kGpu].M + sc[kGpu].X;
    if (i > 0) {
      const Delay d = pipe_delay(r[i - 1], r[i], sum_cpu, sum_gpu, t_gpu_prev, t_cpu_i, t_gpu_i);
      sc[kCpu].D = d.cpu;
      sc[kGpu].D = d.gpu;
    }
    sum_cpu += sc[kCpu].sum();
    sum_gpu += sc[kGpu].sum();
    t_gpu_prev = t_gpu_i;
    if (e) {
      e->steps[i] = sc;
      e->intermediate[i] = inter;
    }
  }
  return {sum_cpu, sum_gpu};
}

}  // namespace

double prefix_bound(const PhaseModel& m, std::span<const double> r) {
  if (r.size() > m.phase->nsteps()) throw std::invalid_argument("ratio prefix longer than the series");
  check_ratios(r);
  const auto [c, g] = walk(m, r, overheads_for(m, r).gpu_prologue, nullptr);
  const PhaseData& ph = *m.phase;
  const double x = static_cast<double>(ph.x());
  std::array<double, 8> a{}, b{};
  for (std::size_t j = r.size(); j < ph.nsteps(); ++j) {
    const StepId s = ph.series.steps[j];
    const double u = ph.stats.avg_units[j];
    a[j] = comp_time(m.cpu, s, 1.0, x, u) + mem_time(m.cpu, s, 1.0, x, u);
    b[j] = comp_time(m.gpu, s, 1.0, x, u) + mem_time(m.gpu, s, 1.0, x, u);
  }
  // Any weighting of the two device sums is below their max; every remaining
  // step adds at least min(w a_j, (1-w) b_j) to the weighted sum.
  double best = std::max(c, g);
  for (int k = 1; k < 16; ++k) {
    const double w = k / 16.0;
    double lb = w * c + (1.0 - w) * g;
    for (std::size_t j = r.size(); j < ph.nsteps(); ++j) lb += std::min(w * a[j], (1.0 - w) * b[j]);
    best = std::max(best, lb);
  }
  return best;
}

CostEstimate predict(const PhaseModel& m, std::span<const double> r) {
  const PhaseData& ph = *m.phase;
  const std::size_t n = ph.nsteps();
  if (r.size() != n) throw std::invalid_argument("ratio vector does not match the step series");
  check_ratios(r);
  const double x = static_cast<double>(ph.x());
  const PhaseOverheads ov = overheads_for(m, r);

  CostEstimate e;
  e.steps.resize(n);
  e.intermediate.assign(n, 0.0);
  const auto [sum_cpu, sum_gpu] = walk(m, r, ov.gpu_prologue, &e);
  e.T_cpu = sum_cpu;
  e.T_gpu = sum_gpu;
  e.T = std::max(e.T_cpu, e.T_gpu);

  if (ph.series.kind == PhaseKind::Build && m.table_mode == TableMode::Separate) {
    const double gpu_built = (1.0 - r[2]) * x;
    e.merge = gpu_built * (m.cpu.cost_per_unit(StepId::B2) +
                           m.cpu.cost_per_unit(StepId::B3) * ph.stats.avg_units[2] +
                           m.cpu.cost_per_unit(StepId::B4));
  }
  e.post_transfer = ov.post_transfer;
  e.regroup = ov.regroup;
  return e;
}

double coarse_item_cost(const DeviceProfile& d, const std::array<float, kStepCount>& units,
                        double* mem_part) {
  double c = 0.0, mem = 0.0;
  for (StepId s : kBuildSeries) {
    c += d.cost_per_unit(s) * units[index(s)];
    mem += d.mem(s) * units[index(s)];
  }
  for (StepId s : kProbeSeries) {
    c += d.cost_per_unit(s) * units[index(s)];
    mem += d.mem(s) * units[index(s)];
  }
  if (mem_part) *mem_part = mem;
  return c;
}

namespace {

std::vector<std::uint32_t> sample_of(const PhaseData& ph, std::size_t pos, std::size_t max_sample) {
  const std::size_t n = std::min(ph.x(), max_sample);
  std::vector<std::uint32_t> u;
  if (ph.units[pos].empty()) {
    u.assign(n, 1);
  } else {
    u.assign(ph.units[pos].begin(), ph.units[pos].begin() + static_cast<std::ptrdiff_t>(n));
  }
  // Phases shorter than the repetition count are measured on a padded copy.
  while (u.size() < static_cast<std::size_t>(kCalibrationRepetitions)) u.push_back(u.empty() ? 1 : u[u.size() % std::max<std::size_t>(1, n)]);
  return u;
}

DeviceProfile calibrate_coarse(const DeviceProfile& truth, const PhaseData& ph, double contention,
                               std::size_t max_sample) {
  const std::size_t n = std::min(ph.x(), max_sample);
  DeviceProfile out = truth;
  if (n == 0) {
    out.instr_per_item[index(StepId::J)] = 0.0;
    out.mem_cost_per_item[index(StepId::J)] = 0.0;
    return out;
  }
  std::vector<double> lane(n);
  double instr = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double mem = 0.0;
    const double c = coarse_item_cost(truth, ph.coarse_units[j], &mem);
    lane[j] = truth.worker_count * (c + contention * mem);
    for (StepId s : kBuildSeries) instr += truth.instr(s) * ph.coarse_units[j][index(s)];
    for (StepId s : kProbeSeries) instr += truth.instr(s) * ph.coarse_units[j][index(s)];
  }
  const double per_item = simulate_step(truth, lane) / static_cast<double>(n);
  instr /= static_cast<double>(n);
  out.instr_per_item[index(StepId::J)] = instr;
  out.mem_cost_per_item[index(StepId::J)] = std::max(0.0, per_item - instr / (truth.ipc * truth.clock_hz));
  out.origin = "calibrated(logical)";
  return out;
}

}  // namespace

PhaseModel calibrate_phase(const PhaseData& ph, const ProfileSet& truth, Arch arch, TableMode mode,
                           std::size_t max_sample) {
  PhaseModel m;
  m.phase = &ph;
  m.cpu = truth.cpu;
  m.gpu = truth.gpu;
  m.system = truth.system;
  m.arch = arch;
  m.table_mode = arch == Arch::Discrete ? TableMode::Separate : mode;
  CalibrationOptions opt;
  opt.co_run = arch == Arch::Coupled;
  opt.contention = truth.system.contention;
  opt.max_sample = max_sample;
  if (ph.series.kind == PhaseKind::Coarse) {
    const double k = opt.co_run ? opt.contention : 0.0;
    m.cpu = calibrate_coarse(truth.cpu, ph, k, max_sample);
    m.gpu = calibrate_coarse(truth.gpu, ph, k, max_sample);
    return m;
  }
  for (std::size_t i = 0; i < ph.nsteps(); ++i) {
    const StepId s = ph.series.steps[i];
    const auto sample = sample_of(ph, i, max_sample);
    m.cpu = calibrate_units(m.cpu, s, sample, opt);
    m.gpu = calibrate_units(m.gpu, s, sample, opt);
  }
  return m;
}

}  // namespace hjcp
