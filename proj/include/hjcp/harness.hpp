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
#include <iosfwd>
#include <string>
#include <vector>

#include "hjcp/device.hpp"
#include "hjcp/engine.hpp"
#include "hjcp/relation.hpp"

namespace hjcp {

struct ResultRow {
  std::string id;
  std::string algo, scheme, arch, table_mode;
  std::size_t r_tuples = 0, s_tuples = 0;
  std::size_t block_size = 0;
  unsigned groups = 1;
  double delta = 0.0;
  std::string axis;
  double axis_value = 0.0;
  std::string ratios;
  double partition_time = 0.0, build_time = 0.0, probe_time = 0.0, pairs_time = 0.0;
  double transfer = 0.0, merge = 0.0, stall = 0.0;
  double cpu_busy = 0.0, gpu_busy = 0.0;
  double predicted = 0.0, measured = 0.0, rel_error = 0.0;
  double lock_overhead = 0.0;  // measured - predicted
  std::uint64_t cursor_ops = 0;
  std::size_t result_count = 0;
  bool argmin = false;
};

const std::vector<std::string>& result_columns();
std::string csv_header();
std::string csv_line(const ResultRow& row);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

std::string format_ratios(const Plan& p);
ResultRow make_row(const std::string& id, const Engine& eng, const ExecutionReport& rep, double delta);

struct ExperimentSpec {
  GenSpec r;
  GenSpec s;  // s.selectivity set: probe keys drawn against R
  EngineConfig cfg;
  Scheme scheme = Scheme::PL;
  SearchOptions search;
  ProfileSet truth = default_profile_set();
  bool functional = true;
};

struct Inputs {
  Relation r;
  Relation s;
};
Inputs make_inputs(const ExperimentSpec& spec);

enum class SweepAxis { Ratio, BlockSize, Selectivity, BuildSize, Groups };
SweepAxis parse_axis(const std::string& s);
std::string to_string(SweepAxis a);
// Default grid points of an axis.
std::vector<double> default_axis_values(SweepAxis a, const ExperimentSpec& spec);

// One row per value; the row with the smallest measured time is marked.
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, SweepAxis axis,
                                 const std::vector<double>& values);

struct MonteCarloRun {
  std::vector<double> r;
  double predicted = 0.0;
  double measured = 0.0;
  double rel_error = 0.0;
};

struct MonteCarloResult {
  std::string phase;
  std::vector<MonteCarloRun> runs;  // ascending measured time
  std::vector<double> searched;
  double searched_predicted = 0.0;
  double searched_measured = 0.0;
  double searched_quantile = 0.0;  // fraction of runs at or below the searched plan
  double within_tolerance = 0.0;   // fraction with rel_error below the tolerance
  double percentile5 = 0.0;        // measured time at the 5th percentile
};

// Random per-step ratio vectors on one phase, compared with the simulator.
MonteCarloResult monte_carlo(const Engine& eng, const PhaseData* phase, std::size_t runs,
                             std::uint64_t seed, const SearchOptions& search, double tolerance = 0.15);
void write_monte_carlo_csv(std::ostream& os, const MonteCarloResult& mc);

}  // namespace hjcp
