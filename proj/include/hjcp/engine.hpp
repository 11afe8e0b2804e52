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
#include <memory>
#include <vector>

#include "hjcp/costmodel.hpp"
#include "hjcp/executor.hpp"
#include "hjcp/scheduler.hpp"
#include "hjcp/simulator.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

struct ExecutionReport {
  Plan plan;
  std::vector<PhaseTiming> phases;  // logical time from the simulator
  PlanEstimate predicted;
  JoinResult result;                // filled by a functional run
  bool functional = false;
  std::size_t result_count = 0;
  std::uint64_t cursor_ops = 0;

  double total() const;
  double transfer() const;
  double merge() const;
  double stall() const;
  double device_busy(int d) const;
};

// Holds a prepared workload, its calibrated per-phase models and simulators.
class Engine {
 public:
  Engine(const Relation& r, const Relation& s, const EngineConfig& cfg, const ProfileSet& truth);

  const Workload& workload() const { return w_; }
  const EngineConfig& config() const { return w_.cfg; }
  const ProfileSet& truth() const { return truth_; }
  std::size_t granule() const { return granule_; }

  std::vector<const PhaseData*> phases(Scheme s) const { return w_.schedule(s); }
  const PhaseModel& model(const PhaseData* ph) const;
  const PhaseSimulator& simulator(const PhaseData* ph) const;

  Plan plan(Scheme s, const SearchOptions& opt = {}) const;
  PlanEstimate predict(const Plan& p) const;
  std::vector<PhaseTiming> simulate(const Plan& p) const;
  ExecutionReport execute(const Plan& p, bool functional = true) const;

 private:
  std::size_t slot(const PhaseData* ph) const;
  void check(const Plan& p) const;

  Workload w_;
  ProfileSet truth_;
  std::size_t granule_;
  std::vector<PhaseModel> models_;  // fine phases, then coarse
  std::vector<std::unique_ptr<PhaseSimulator>> sims_;
};

}  // namespace hjcp
