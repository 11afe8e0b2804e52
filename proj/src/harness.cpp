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

#include "hjcp/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hjcp {

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "id",          "algo",        "scheme",     "arch",        "table_mode",    "r_tuples",
      "s_tuples",    "block_size",  "groups",     "delta",       "axis",          "axis_value",
      "ratios",      "partition_time", "build_time", "probe_time", "pairs_time",  "transfer",
      "merge",       "stall",       "cpu_busy",   "gpu_busy",    "predicted",     "measured",
      "rel_error",   "lock_overhead", "cursor_ops", "result_count", "argmin"};
  return cols;
}

std::string csv_header() {
  std::string h;
  for (const auto& c : result_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string csv_line(const ResultRow& x) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                     x.id, x.algo, x.scheme, x.arch, x.table_mode, x.r_tuples, x.s_tuples, x.block_size,
                     x.groups, x.delta, x.axis, x.axis_value, x.ratios, x.partition_time, x.build_time,
                     x.probe_time, x.pairs_time, x.transfer, x.merge, x.stall, x.cpu_busy, x.gpu_busy,
                     x.predicted, x.measured, x.rel_error, x.lock_overhead, x.cursor_ops, x.result_count,
                     x.argmin ? 1 : 0);
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows) os << csv_line(r) << '\n';
}

std::string format_ratios(const Plan& p) {
  if (p.scheme == Scheme::BasicUnit) return fmt::format("chunk={}", p.chunk_size);
  std::string out;
  for (std::size_t k = 0; k < p.ratios.size(); ++k) {
    if (k) out += '|';
    for (std::size_t i = 0; i < p.ratios[k].size(); ++i) {
      if (i) out += ';';
      out += fmt::format("{:.6g}", p.ratios[k][i]);
    }
  }
  return out;
}

ResultRow make_row(const std::string& id, const Engine& eng, const ExecutionReport& rep, double delta) {
  const EngineConfig& cfg = eng.config();
  ResultRow row;
  row.id = id;
  row.algo = to_string(cfg.algo);
  row.scheme = to_string(rep.plan.scheme);
  row.arch = to_string(cfg.arch);
  row.table_mode = to_string(cfg.effective_table_mode());
  row.r_tuples = eng.workload().r->size();
  row.s_tuples = eng.workload().s->size();
  row.block_size = cfg.block_size;
  row.groups = cfg.groups;
  row.delta = delta;
  row.ratios = format_ratios(rep.plan);
  for (const auto& ph : rep.phases) {
    const double t = ph.total();
    if (ph.name.rfind("partition", 0) == 0) row.partition_time += t;
    else if (ph.name == "build") row.build_time += t;
    else if (ph.name == "pairs") row.pairs_time += t;
    else row.probe_time += t;
  }
  row.transfer = rep.transfer();
  row.merge = rep.merge();
  row.stall = rep.stall();
  row.cpu_busy = rep.device_busy(0);
  row.gpu_busy = rep.device_busy(1);
  row.predicted = rep.predicted.total();
  row.measured = rep.total();
  row.rel_error = row.measured > 0 ? std::abs(row.predicted - row.measured) / row.measured : 0.0;
  row.lock_overhead = row.measured - row.predicted;
  row.cursor_ops = rep.cursor_ops;
  row.result_count = rep.result_count;
  return row;
}

Inputs make_inputs(const ExperimentSpec& spec) {
  Inputs in;
  in.r = generate(spec.r);
  if (spec.s.selectivity) {
    in.s = gen_probe(in.r, spec.s.n, *spec.s.selectivity, spec.s.seed);
  } else {
    in.s = generate(spec.s);
  }
  return in;
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "ratio") return SweepAxis::Ratio;
  if (s == "block_size") return SweepAxis::BlockSize;
  if (s == "selectivity") return SweepAxis::Selectivity;
  if (s == "build_size") return SweepAxis::BuildSize;
  if (s == "groups") return SweepAxis::Groups;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Ratio: return "ratio";
    case SweepAxis::BlockSize: return "block_size";
    case SweepAxis::Selectivity: return "selectivity";
    case SweepAxis::BuildSize: return "build_size";
    case SweepAxis::Groups: return "groups";
  }
  return "?";
}

std::vector<double> default_axis_values(SweepAxis a, const ExperimentSpec& spec) {
  std::vector<double> v;
  switch (a) {
    case SweepAxis::Ratio:
      v = ratio_grid(spec.search.delta);
      std::reverse(v.begin(), v.end());
      break;
    case SweepAxis::BlockSize:
      for (double b = 64; b <= 8192; b *= 2) v.push_back(b);
      break;
    case SweepAxis::Selectivity:
      v = {0.0625, 0.125, 0.25, 0.5, 1.0};
      break;
    case SweepAxis::BuildSize:
      for (double n = 1 << 16; n <= static_cast<double>(spec.s.n); n *= 4) v.push_back(n);
      break;
    case SweepAxis::Groups:
      v = {1, 2, 4, 8, 16, 32};
      break;
  }
  return v;
}

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, SweepAxis axis,
                                 const std::vector<double>& values) {
  std::vector<ResultRow> rows;
  Inputs base = make_inputs(spec);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    ExperimentSpec sp = spec;
    const Inputs* in = &base;
    Inputs local;
    switch (axis) {
      case SweepAxis::Ratio:
        break;
      case SweepAxis::BlockSize:
        sp.cfg.block_size = static_cast<std::size_t>(v);
        break;
      case SweepAxis::Selectivity:
        sp.s.selectivity = v;
        local = make_inputs(sp);
        in = &local;
        break;
      case SweepAxis::BuildSize:
        sp.r.n = static_cast<std::size_t>(v);
        local = make_inputs(sp);
        in = &local;
        break;
      case SweepAxis::Groups:
        sp.cfg.groups = static_cast<unsigned>(v);
        break;
    }
    const Engine eng(in->r, in->s, sp.cfg, sp.truth);
    Plan plan;
    if (axis == SweepAxis::Ratio) {
      plan.scheme = Scheme::DD;
      plan.table_mode = sp.cfg.effective_table_mode();
      for (const PhaseData* ph : eng.phases(Scheme::DD)) plan.ratios.emplace_back(ph->nsteps(), v);
    } else {
      plan = eng.plan(sp.scheme, sp.search);
    }
    const auto rep = eng.execute(plan, sp.functional);
    ResultRow row = make_row(fmt::format("{}-{}", to_string(axis), k), eng, rep, sp.search.delta);
    row.axis = to_string(axis);
    row.axis_value = v;
    rows.push_back(std::move(row));
  }
  if (!rows.empty()) {
    auto best = std::min_element(rows.begin(), rows.end(),
                                 [](const ResultRow& a, const ResultRow& b) { return a.measured < b.measured; });
    best->argmin = true;
  }
  return rows;
}

MonteCarloResult monte_carlo(const Engine& eng, const PhaseData* phase, std::size_t runs,
                             std::uint64_t seed, const SearchOptions& search, double tolerance) {
  if (runs == 0) throw std::invalid_argument("runs must be >= 1");
  const PhaseModel& m = eng.model(phase);
  const PhaseSimulator& sim = eng.simulator(phase);
  MonteCarloResult mc;
  mc.phase = phase->series.name;
  SplitMix64 rng(seed);
  std::size_t ok = 0;
  for (std::size_t k = 0; k < runs; ++k) {
    MonteCarloRun run;
    run.r.resize(phase->nsteps());
    for (double& v : run.r) v = rng.unit();
    run.predicted = predict(m, run.r).total();
    run.measured = sim.run_static(run.r).total();
    run.rel_error = std::abs(run.predicted - run.measured) / run.measured;
    ok += run.rel_error < tolerance;
    mc.runs.push_back(std::move(run));
  }
  std::sort(mc.runs.begin(), mc.runs.end(),
            [](const MonteCarloRun& a, const MonteCarloRun& b) { return a.measured < b.measured; });
  mc.within_tolerance = static_cast<double>(ok) / static_cast<double>(runs);
  const std::size_t rank = (runs * 5 + 99) / 100;  // nearest rank
  mc.percentile5 = mc.runs[std::max<std::size_t>(rank, 1) - 1].measured;

  mc.searched = search_pl(m, search).r;
  mc.searched_predicted = predict(m, mc.searched).total();
  mc.searched_measured = sim.run_static(mc.searched).total();
  std::size_t below = 0;
  for (const auto& r : mc.runs) below += r.measured <= mc.searched_measured;
  mc.searched_quantile = static_cast<double>(below) / static_cast<double>(runs);
  return mc;
}

void write_monte_carlo_csv(std::ostream& os, const MonteCarloResult& mc) {
  os << "phase,rank,cdf,ratios,predicted,measured,rel_error\n";
  auto ratios = [](const std::vector<double>& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) s += fmt::format("{}{:.6g}", i ? ";" : "", r[i]);
    return s;
  };
  const double n = static_cast<double>(mc.runs.size());
  for (std::size_t k = 0; k < mc.runs.size(); ++k) {
    const auto& r = mc.runs[k];
    os << fmt::format("{},{},{},{},{},{},{}\n", mc.phase, k + 1, static_cast<double>(k + 1) / n,
                      ratios(r.r), r.predicted, r.measured, r.rel_error);
  }
  os << fmt::format("{},searched,{},{},{},{},{}\n", mc.phase, mc.searched_quantile, ratios(mc.searched),
                    mc.searched_predicted, mc.searched_measured,
                    std::abs(mc.searched_predicted - mc.searched_measured) / mc.searched_measured);
}

}  // namespace hjcp
