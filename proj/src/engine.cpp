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

#include "hjcp/engine.hpp"

#include <stdexcept>

namespace hjcp {

double ExecutionReport::total() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.total();
  return t;
}

double ExecutionReport::transfer() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.transfer();
  return t;
}

double ExecutionReport::merge() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.merge;
  return t;
}

double ExecutionReport::stall() const {
  double t = 0.0;
  for (const auto& p : phases) t += p.dev[0].stall + p.dev[1].stall;
  return t;
}

double ExecutionReport::device_busy(int d) const {
  double t = 0.0;
  for (const auto& p : phases) t += p.dev[d].busy();
  return t;
}

Engine::Engine(const Relation& r, const Relation& s, const EngineConfig& cfg, const ProfileSet& truth)
    : w_(prepare(r, s, cfg)), truth_(truth), granule_(granule_for(truth)) {
  const TableMode mode = cfg.effective_table_mode();
  const SimOptions opt{cfg.arch, mode, cfg.block_size, cfg.chunk_items};
  auto add = [&](const PhaseData& ph) {
    models_.push_back(calibrate_phase(ph, truth_, cfg.arch, mode));
    sims_.push_back(std::make_unique<PhaseSimulator>(ph, truth_, opt));
  };
  for (const auto& ph : w_.fine) add(ph);
  if (cfg.algo == Algo::PHJ) add(w_.coarse);
}

std::size_t Engine::slot(const PhaseData* ph) const {
  for (std::size_t i = 0; i < w_.fine.size(); ++i) {
    if (&w_.fine[i] == ph) return i;
  }
  if (ph == &w_.coarse && w_.cfg.algo == Algo::PHJ) return w_.fine.size();
  throw std::invalid_argument("phase does not belong to this engine");
}

const PhaseModel& Engine::model(const PhaseData* ph) const { return models_[slot(ph)]; }
const PhaseSimulator& Engine::simulator(const PhaseData* ph) const { return *sims_[slot(ph)]; }

Plan Engine::plan(Scheme s, const SearchOptions& opt) const {
  Plan p;
  p.scheme = s;
  p.table_mode = w_.cfg.effective_table_mode();
  if (s == Scheme::BasicUnit) {
    p.chunk_size = w_.cfg.chunk_items;
    return p;
  }
  for (const PhaseData* ph : phases(s)) {
    const PhaseModel& m = model(ph);
    PhaseChoice c;
    switch (s) {
      case Scheme::CpuOnly: c = search_fixed(m, 1.0); break;
      case Scheme::GpuOnly: c = search_fixed(m, 0.0); break;
      case Scheme::OL: c = search_ol(m); break;
      case Scheme::DD: c = search_dd(m, opt.delta); break;
      default: c = search_pl(m, opt); break;
    }
    p.budget_exhausted = p.budget_exhausted || c.budget_exhausted;
    p.ratios.push_back(std::move(c.r));
  }
  return p;
}

void Engine::check(const Plan& p) const {
  if (p.table_mode != w_.cfg.effective_table_mode()) {
    throw std::invalid_argument("plan table mode differs from the engine configuration");
  }
  if (p.scheme == Scheme::BasicUnit) return;
  const auto ph = phases(p.scheme);
  if (p.ratios.size() != ph.size()) throw std::invalid_argument("plan has the wrong number of phases");
  for (std::size_t k = 0; k < ph.size(); ++k) {
    if (p.ratios[k].size() != ph[k]->nsteps()) {
      throw std::invalid_argument("plan ratios do not match phase " + ph[k]->series.name);
    }
  }
}

std::vector<PhaseTiming> Engine::simulate(const Plan& p) const {
  check(p);
  std::vector<PhaseTiming> out;
  const auto ph = phases(p.scheme);
  for (std::size_t k = 0; k < ph.size(); ++k) {
    const PhaseSimulator& sim = simulator(ph[k]);
    out.push_back(p.scheme == Scheme::BasicUnit
                      ? sim.run_dynamic(p.chunk_size ? p.chunk_size : sim.chunk())
                      : sim.run_static(p.ratios[k]));
  }
  return out;
}

namespace {

// CPU share realized by a dynamic run.
double realized_share(const PhaseTiming& t, std::size_t x) {
  if (x == 0) return 1.0;
  std::size_t cpu = 0;
  for (std::size_t k = 0; k < t.chunk_owner.size(); ++k) {
    if (t.chunk_owner[k] == 0) cpu += std::min(x, (k + 1) * t.chunk_items) - k * t.chunk_items;
  }
  return static_cast<double>(cpu) / static_cast<double>(x);
}

}  // namespace

PlanEstimate Engine::predict(const Plan& p) const {
  check(p);
  PlanEstimate e;
  const auto ph = phases(p.scheme);
  if (p.scheme == Scheme::BasicUnit) {
    const auto timing = simulate(p);
    for (std::size_t k = 0; k < ph.size(); ++k) {
      const std::vector<double> r(ph[k]->nsteps(), realized_share(timing[k], ph[k]->x()));
      e.phases.push_back(hjcp::predict(model(ph[k]), r));
    }
    return e;
  }
  for (std::size_t k = 0; k < ph.size(); ++k) e.phases.push_back(hjcp::predict(model(ph[k]), p.ratios[k]));
  return e;
}

ExecutionReport Engine::execute(const Plan& p, bool functional) const {
  ExecutionReport rep;
  rep.plan = p;
  rep.phases = simulate(p);
  rep.predicted = predict(p);
  rep.result_count = w_.matches;
  if (!functional) return rep;

  const auto ph = phases(p.scheme);
  std::vector<PhaseAssignment> asg(ph.size());
  for (std::size_t k = 0; k < ph.size(); ++k) {
    const PhaseSimulator& sim = simulator(ph[k]);
    if (p.scheme == Scheme::BasicUnit) {
      asg[k].chunk_owner = rep.phases[k].chunk_owner;
      asg[k].chunk = rep.phases[k].chunk_items;
    } else {
      for (double r : p.ratios[k]) asg[k].splits.push_back(split_point(r, ph[k]->x(), granule_));
      asg[k].chunk = sim.chunk();
    }
  }
  FunctionalRun run = run_functional(w_, p.scheme, asg, granule_);
  rep.functional = true;
  rep.result = std::move(run.result);
  rep.result_count = rep.result.size();
  rep.cursor_ops = run.cursor_ops;
  return rep;
}

}  // namespace hjcp
