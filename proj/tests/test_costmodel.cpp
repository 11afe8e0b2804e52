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

#include <cmath>
#include <vector>

#include "hjcp/costmodel.hpp"
#include "hjcp/relation.hpp"

using namespace hjcp;

namespace {

PhaseData toy_phase(std::vector<StepId> steps, std::size_t x) {
  PhaseData ph;
  ph.series.name = "toy";
  ph.series.kind = PhaseKind::Build;
  ph.series.steps = std::move(steps);
  ph.series.x = x;
  ph.units.assign(ph.series.steps.size(), {});
  ph.stats.avg_units.fill(1.0);
  return ph;
}

PhaseModel toy_model(const PhaseData& ph, Arch arch) {
  const auto p = canned_profiles();
  PhaseModel m;
  m.phase = &ph;
  m.cpu = p.cpu;
  m.gpu = p.gpu;
  m.arch = arch;
  m.table_mode = arch == Arch::Discrete ? TableMode::Separate : TableMode::Shared;
  return m;
}

bool rel_eq(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b)); }

}  // namespace

TEST_CASE("per-step time is instructions over ipc times clock plus memory") {
  const PhaseData ph = toy_phase(kBuildSeries, 1000);
  const PhaseModel m = toy_model(ph, Arch::Coupled);
  const std::vector<double> r{0.3, 0.3, 0.3, 0.3};
  const CostEstimate e = predict(m, r);
  for (std::size_t i = 0; i < 4; ++i) {
    const StepId s = kBuildSeries[i];
    const double ccpu = m.cpu.instr(s) * 0.3 * 1000 / (m.cpu.ipc * m.cpu.clock_hz);
    const double cgpu = m.gpu.instr(s) * 0.7 * 1000 / (m.gpu.ipc * m.gpu.clock_hz);
    CHECK(rel_eq(e.steps[i][kCpu].C, ccpu));
    CHECK(rel_eq(e.steps[i][kGpu].C, cgpu));
    CHECK(rel_eq(e.steps[i][kCpu].M, m.cpu.mem(s) * 300));
    CHECK(rel_eq(e.steps[i][kGpu].M, m.gpu.mem(s) * 700));
    CHECK(e.steps[i][kCpu].D == 0.0);
    CHECK(e.steps[i][kGpu].D == 0.0);
  }
  CHECK(e.T == std::max(e.T_cpu, e.T_gpu));
}

TEST_CASE("pipeline delay hand cases") {
  // CPU share grows: the CPU waits for the GPU's unpipelined remainder.
  Delay d = pipe_delay(0.5, 0.75, 3.0, 10.0, 4.0, 2.0, 1.0);
  CHECK(rel_eq(d.cpu, 3.0));
  CHECK(d.gpu == 0.0);
  // Raw value -4 clamps to zero.
  d = pipe_delay(0.5, 0.75, 10.0, 10.0, 4.0, 2.0, 1.0);
  CHECK(d.cpu == 0.0);
  CHECK(d.gpu == 0.0);
  // GPU share grows.
  d = pipe_delay(0.75, 0.5, 10.0, 5.0, 1.0, 1.0, 4.0);
  CHECK(rel_eq(d.gpu, 3.0));
  CHECK(d.cpu == 0.0);
  CHECK(pipe_delay(0.4, 0.4, 100.0, 0.0, 5.0, 1.0, 1.0).cpu == 0.0);
  CHECK(pipe_delay(0.4, 0.4, 0.0, 100.0, 5.0, 1.0, 1.0).gpu == 0.0);
}

TEST_CASE("equal consecutive ratios never delay") {
  const PhaseData ph = toy_phase(kProbeSeries, 5000);
  SplitMix64 g(3);
  for (Arch arch : {Arch::Coupled, Arch::Discrete}) {
    const PhaseModel m = toy_model(ph, arch);
    for (int t = 0; t < 50; ++t) {
      const double v = g.unit();
      const CostEstimate e = predict(m, std::vector<double>(4, v));
      for (std::size_t i = 1; i < 4; ++i) {
        CHECK(e.steps[i][kCpu].D == 0.0);
        CHECK(e.steps[i][kGpu].D == 0.0);
        CHECK(e.intermediate[i] == 0.0);
      }
    }
  }
}

TEST_CASE("discrete link charges handed-over items to the consumer") {
  const PhaseData ph = toy_phase(kBuildSeries, 10000);
  const PhaseModel m = toy_model(ph, Arch::Discrete);
  const CostEstimate e = predict(m, std::vector<double>{0.2, 0.6, 0.6, 0.1});
  TransferLink link = m.system.link;
  link.enabled = true;
  CHECK(e.steps[1][kCpu].X == doctest::Approx(transfer_time(link, 0.4 * 10000 * 8)));
  CHECK(e.steps[1][kGpu].X == 0.0);
  CHECK(e.steps[2][kCpu].X == 0.0);
  CHECK(e.steps[3][kGpu].X == doctest::Approx(transfer_time(link, 0.5 * 10000 * 8)));
  CHECK(e.merge > 0.0);
  const CostEstimate coupled = predict(toy_model(ph, Arch::Coupled), std::vector<double>{0.2, 0.6, 0.6, 0.1});
  CHECK(coupled.merge == 0.0);
  CHECK(coupled.post_transfer == 0.0);
}

TEST_CASE("single-device plans have no GPU or CPU time") {
  const PhaseData ph = toy_phase(kBuildSeries, 1000);
  const PhaseModel m = toy_model(ph, Arch::Discrete);
  const CostEstimate cpu = predict(m, std::vector<double>(4, 1.0));
  CHECK(cpu.T_gpu == 0.0);
  CHECK(cpu.post() == 0.0);
  const CostEstimate gpu = predict(m, std::vector<double>(4, 0.0));
  CHECK(gpu.T_cpu == 0.0);
}

TEST_CASE("ratio validation") {
  const PhaseData ph = toy_phase(kBuildSeries, 1000);
  const PhaseModel m = toy_model(ph, Arch::Coupled);
  CHECK_THROWS_AS(predict(m, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(predict(m, std::vector<double>{0.5, 0.5, 1.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(predict(m, std::vector<double>{0.5, NAN, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("prefix bound never exceeds a completion") {
  const PhaseData ph = toy_phase(kProbeSeries, 20000);
  SplitMix64 g(11);
  for (Arch arch : {Arch::Coupled, Arch::Discrete}) {
    const PhaseModel m = toy_model(ph, arch);
    for (int t = 0; t < 300; ++t) {
      std::vector<double> r(4);
      for (auto& v : r) v = g.below(5) == 0 ? std::round(g.unit()) : g.unit();
      const CostEstimate e = predict(m, r);
      CHECK(prefix_bound(m, r) == doctest::Approx(e.T));
      for (std::size_t k = 0; k < 4; ++k) {
        REQUIRE(prefix_bound(m, std::span<const double>(r.data(), k)) <= e.T * (1 + 1e-12));
      }
    }
  }
}
