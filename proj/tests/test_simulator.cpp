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

#include <vector>

#include "hjcp/simulator.hpp"
#include "hjcp/workload.hpp"

using namespace hjcp;

namespace {

struct Fixture {
  Relation r = gen_skewed(40000, 25, 2);
  Relation s = gen_probe(r, 40000, 0.5, 3);
  ProfileSet truth = default_profile_set();
  Workload w;
  explicit Fixture(Algo algo = Algo::SHJ, unsigned bits = 3) {
    EngineConfig cfg;
    cfg.algo = algo;
    cfg.pass_bits = bits;
    w = prepare(r, s, cfg);
  }
};

void check_accounting(const PhaseTiming& t) {
  for (int d = 0; d < 2; ++d) {
    CHECK(t.dev[d].end == doctest::Approx(t.dev[d].total()));
    CHECK(t.dev[d].stall >= 0.0);
    CHECK(t.dev[d].lock <= t.dev[d].busy() + 1e-15);
  }
}

}  // namespace

TEST_CASE("granule and split points") {
  ProfileSet t = default_profile_set();
  CHECK(granule_for(t) == 64);
  t.cpu.wavefront_width = 3;
  CHECK(granule_for(t) == 192);
  for (std::size_t x : {0U, 100U, 6400U, 100000U}) {
    CHECK(split_point(1.0, x, 64) == x);
    CHECK(split_point(0.0, x, 64) == 0);
    std::size_t prev = 0;
    for (int k = 0; k <= 50; ++k) {
      const std::size_t sp = split_point(k / 50.0, x, 64);
      CHECK(sp >= prev);
      CHECK(sp <= x);
      CHECK((sp % 64 == 0 || sp == x));
      prev = sp;
    }
  }
  CHECK(default_chunk(1000, 64) == 64);
  CHECK(default_chunk(1 << 24, 64) == 65536);
}

TEST_CASE("CPU-only and GPU-only runs keep the other device idle") {
  Fixture f;
  for (const PhaseData& ph : f.w.fine) {
    PhaseSimulator sim(ph, f.truth, SimOptions{});
    const std::vector<double> ones(ph.nsteps(), 1.0), zeros(ph.nsteps(), 0.0);
    const PhaseTiming cpu = sim.run_static(ones);
    CHECK(cpu.dev[kGpu].busy() == 0.0);
    CHECK(cpu.dev[kGpu].end == 0.0);
    CHECK(cpu.transfer() == 0.0);
    CHECK(cpu.dev[kCpu].items == ph.x() * ph.nsteps());
    const PhaseTiming gpu = sim.run_static(zeros);
    CHECK(gpu.dev[kCpu].busy() == 0.0);
    check_accounting(cpu);
    check_accounting(gpu);
  }
}

TEST_CASE("equal ratios give no stalls in coupled mode") {
  Fixture f;
  for (const PhaseData& ph : f.w.fine) {
    PhaseSimulator sim(ph, f.truth, SimOptions{});
    for (double v : {0.25, 0.5, 0.8}) {
      const PhaseTiming t = sim.run_static(std::vector<double>(ph.nsteps(), v));
      CHECK(t.dev[kCpu].stall == 0.0);
      CHECK(t.dev[kGpu].stall == 0.0);
      check_accounting(t);
    }
  }
}

TEST_CASE("discrete mode pays transfers for handed-over items") {
  Fixture f;
  const PhaseData& ph = f.w.fine[0];
  SimOptions opt;
  opt.arch = Arch::Discrete;
  opt.table_mode = TableMode::Separate;
  PhaseSimulator sim(ph, f.truth, opt);
  const PhaseTiming t = sim.run_static(std::vector<double>{0.2, 0.7, 0.7, 0.4});
  CHECK(t.transfer() > 0.0);
  CHECK(t.merge > 0.0);
  check_accounting(t);
  PhaseSimulator coupled(ph, f.truth, SimOptions{});
  CHECK(coupled.run_static(std::vector<double>{0.2, 0.7, 0.7, 0.4}).transfer() == 0.0);
}

TEST_CASE("busy time matches the per-device cost sums when run alone") {
  Fixture f;
  const PhaseData& ph = f.w.fine[1];
  PhaseSimulator sim(ph, f.truth, SimOptions{});
  const PhaseTiming t = sim.run_static(std::vector<double>(ph.nsteps(), 1.0));
  double want = 0.0;
  for (std::size_t i = 0; i < ph.nsteps(); ++i) want += sim.cost(kCpu, i, 0, ph.x());
  CHECK(t.dev[kCpu].busy() == doctest::Approx(want));
}

TEST_CASE("dynamic scheduling with one chunk stays on one device") {
  Fixture f;
  for (const PhaseData& ph : f.w.fine) {
    PhaseSimulator sim(ph, f.truth, SimOptions{});
    const PhaseTiming one = sim.run_dynamic(ph.x());
    CHECK(one.dev[kGpu].items == 0);
    CHECK(one.chunk_owner.size() == 1);
    const PhaseTiming many = sim.run_dynamic(1024);
    CHECK(many.dev[kCpu].items + many.dev[kGpu].items == ph.x() * ph.nsteps());
    CHECK(many.dev[kCpu].items > 0);
    CHECK(many.dev[kGpu].items > 0);
    check_accounting(many);
  }
}

TEST_CASE("coarse phase simulates partition pairs as one step") {
  Fixture f(Algo::PHJ, 5);
  REQUIRE(f.w.coarse.x() == f.w.partitions);
  PhaseSimulator sim(f.w.coarse, f.truth, SimOptions{});
  const PhaseTiming t = sim.run_static(std::vector<double>{0.5});
  CHECK(t.dev[kCpu].busy() > 0.0);
  CHECK(t.dev[kGpu].busy() > 0.0);
}
