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

#include <atomic>
#include <stdexcept>
#include <vector>

#include "hjcp/engine.hpp"
#include "hjcp/executor.hpp"
#include "hjcp/join.hpp"

using namespace hjcp;

namespace {

// Records, per step, the order in which item ranges ran.
class TraceRunner : public PhaseRunner {
 public:
  TraceRunner(std::size_t steps, std::size_t items) : steps_(steps), items_(items), seen_(steps * items) {}
  std::size_t nsteps() const override { return steps_; }
  std::size_t items() const override { return items_; }
  void run(std::size_t i, DeviceLocal&, std::size_t a, std::size_t b) override {
    for (std::size_t j = a; j < b; ++j) {
      if (i > 0 && seen_[(i - 1) * items_ + j].load() == 0) ok = false;
      seen_[i * items_ + j].fetch_add(1);
    }
    if (throw_at == static_cast<int>(i)) throw std::runtime_error("kernel failed");
  }
  bool all_once() const {
    for (const auto& v : seen_) {
      if (v.load() != 1) return false;
    }
    return true;
  }
  std::atomic<bool> ok{true};
  int throw_at = -1;

 private:
  std::size_t steps_, items_;
  std::vector<std::atomic<int>> seen_;
};

}  // namespace

TEST_CASE("tasks cover every item of every step once") {
  PhaseAssignment asg;
  asg.splits = {128, 0, 256, 192};  // granule aligned
  asg.chunk = 64;
  const DeviceTasks t = make_tasks(asg, 256, 4);
  TraceRunner run(4, 256);
  DeviceLocal cpu(0, 256), gpu(1, 256);
  execute_phase(run, t, 64, 0, {&cpu, &gpu});
  CHECK(run.all_once());
  CHECK(run.ok);

  PhaseAssignment dyn;
  dyn.chunk = 64;
  dyn.chunk_owner = {0, 1, 1, 0};
  const DeviceTasks d = make_tasks(dyn, 256, 3);
  CHECK(d[0].size() == 2);
  CHECK(d[1].size() == 2);
  CHECK(d[0][0].step == -1);
  TraceRunner run2(3, 256);
  execute_phase(run2, d, 64, 0, {&cpu, &gpu});
  CHECK(run2.all_once());

  asg.chunk = 0;
  CHECK_THROWS_AS(make_tasks(asg, 256, 4), std::invalid_argument);
  asg.chunk = 64;
  CHECK_THROWS_AS(make_tasks(asg, 256, 3), std::invalid_argument);
}

TEST_CASE("a bounded handoff queue reports a deadlock") {
  DeviceTasks t;
  t[0] = {{0, 0, 64}, {0, 64, 128}};
  t[1] = {{1, 64, 128}, {1, 0, 64}};
  TraceRunner run(2, 128);
  DeviceLocal cpu(0, 256), gpu(1, 256);
  CHECK_THROWS_AS(execute_phase(run, t, 64, 64, {&cpu, &gpu}), HandoffDeadlock);
  TraceRunner open(2, 128);
  execute_phase(open, t, 64, 0, {&cpu, &gpu});
  CHECK(open.all_once());
  TraceRunner roomy(2, 128);
  execute_phase(roomy, t, 64, 128, {&cpu, &gpu});
  CHECK(roomy.all_once());
}

TEST_CASE("kernel exceptions reach the caller") {
  PhaseAssignment asg;
  asg.splits = {128, 0};
  asg.chunk = 64;
  TraceRunner run(2, 256);
  run.throw_at = 1;
  DeviceLocal cpu(0, 256), gpu(1, 256);
  CHECK_THROWS_AS(execute_phase(run, make_tasks(asg, 256, 2), 64, 0, {&cpu, &gpu}), std::runtime_error);
}

TEST_CASE("every scheme returns the oracle result") {
  const Relation r = gen_skewed(20000, 25, 8);
  const Relation s = gen_probe(r, 24000, 0.5, 9);
  const JoinResult oracle = sort_join_oracle(r, s);
  for (Algo algo : {Algo::SHJ, Algo::PHJ}) {
    for (Arch arch : {Arch::Coupled, Arch::Discrete}) {
      for (TableMode mode : {TableMode::Shared, TableMode::Separate}) {
        EngineConfig cfg;
        cfg.algo = algo;
        cfg.arch = arch;
        cfg.table_mode = mode;
        cfg.pass_bits = 3;
        cfg.groups = mode == TableMode::Shared ? 1 : 8;
        const Engine eng(r, s, cfg, default_profile_set());
        for (Scheme sc : {Scheme::CpuOnly, Scheme::GpuOnly, Scheme::OL, Scheme::DD, Scheme::PL,
                          Scheme::BasicUnit, Scheme::CoarsePL}) {
          if (sc == Scheme::CoarsePL && algo == Algo::SHJ) continue;
          CAPTURE(to_string(algo));
          CAPTURE(to_string(arch));
          CAPTURE(to_string(mode));
          CAPTURE(to_string(sc));
          const ExecutionReport rep = eng.execute(eng.plan(sc));
          CHECK(rep.result_count == oracle.size());
          CHECK(same_multiset(rep.result, oracle));
          CHECK(rep.total() > 0.0);
        }
      }
    }
  }
}

TEST_CASE("separate tables pay a merge, shared do not") {
  const Relation r = gen_uniform(20000, KeyRange{0, 1 << 20}, 1);
  const Relation s = gen_uniform(20000, KeyRange{0, 1 << 20}, 2);
  EngineConfig cfg;
  const Engine shared(r, s, cfg, default_profile_set());
  cfg.table_mode = TableMode::Separate;
  const Engine sep(r, s, cfg, default_profile_set());
  const ExecutionReport a = shared.execute(shared.plan(Scheme::DD), false);
  const ExecutionReport b = sep.execute(sep.plan(Scheme::DD), false);
  CHECK(a.merge() == 0.0);
  CHECK(b.merge() > 0.0);
  CHECK_FALSE(b.functional);
  CHECK(b.result.empty());
}

TEST_CASE("plans are checked against the engine") {
  const Relation r = gen_uniform(5000, KeyRange{}, 1);
  const Relation s = gen_uniform(5000, KeyRange{}, 2);
  const Engine eng(r, s, EngineConfig{}, default_profile_set());
  Plan p = eng.plan(Scheme::PL);
  CHECK(eng.predict(p).total() == doctest::Approx(eng.execute(p, false).predicted.total()));
  p.ratios.pop_back();
  CHECK_THROWS_AS(eng.execute(p), std::invalid_argument);
  p = eng.plan(Scheme::PL);
  p.table_mode = TableMode::Separate;
  CHECK_THROWS_AS(eng.execute(p), std::invalid_argument);
}

TEST_CASE("predictions of single-device plans") {
  const Relation r = gen_uniform(30000, KeyRange{}, 1);
  const Relation s = gen_uniform(30000, KeyRange{}, 2);
  const Engine eng(r, s, EngineConfig{}, default_profile_set());
  const ExecutionReport cpu = eng.execute(eng.plan(Scheme::CpuOnly), false);
  const ExecutionReport gpu = eng.execute(eng.plan(Scheme::GpuOnly), false);
  CHECK(cpu.device_busy(kGpu) == 0.0);
  CHECK(gpu.device_busy(kCpu) == 0.0);
  const ExecutionReport pl = eng.execute(eng.plan(Scheme::PL), false);
  CHECK(pl.predicted.total() <= cpu.predicted.total());
  CHECK(pl.predicted.total() <= gpu.predicted.total());
}
