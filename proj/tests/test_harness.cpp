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

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "hjcp/harness.hpp"

using namespace hjcp;

namespace {

ExperimentSpec small_spec(std::size_t n) {
  ExperimentSpec sp;
  sp.r.n = n;
  sp.r.distribution = Distribution::Skewed;
  sp.r.s_percent = 10;
  sp.r.seed = 3;
  sp.s.n = n;
  sp.s.selectivity = 0.5;
  sp.s.seed = 4;
  return sp;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("result CSV header") {
  CHECK(csv_header() ==
        "id,algo,scheme,arch,table_mode,r_tuples,s_tuples,block_size,groups,delta,axis,axis_value,"
        "ratios,partition_time,build_time,probe_time,pairs_time,transfer,merge,stall,cpu_busy,"
        "gpu_busy,predicted,measured,rel_error,lock_overhead,cursor_ops,result_count,argmin");
  ResultRow row;
  row.id = "x";
  const std::string line = csv_line(row);
  CHECK(std::count(line.begin(), line.end(), ',') == static_cast<long>(result_columns().size() - 1));
}

TEST_CASE("ratio formatting") {
  Plan p;
  p.scheme = Scheme::PL;
  p.ratios = {{1.0, 0.5}, {0.25}};
  CHECK(format_ratios(p) == "1;0.5|0.25");
  p.scheme = Scheme::BasicUnit;
  p.ratios.clear();
  p.chunk_size = 4096;
  CHECK(format_ratios(p) == "chunk=4096");
}

TEST_CASE("inputs follow the spec") {
  const ExperimentSpec sp = small_spec(1000);
  const Inputs in = make_inputs(sp);
  CHECK(in.r.size() == 1000);
  CHECK(in.s.size() == 1000);
  CHECK(make_inputs(sp).s == in.s);
}

TEST_CASE("ratio sweep covers the grid and marks one argmin") {
  ExperimentSpec sp = small_spec(8192);
  sp.functional = false;
  const auto values = default_axis_values(SweepAxis::Ratio, sp);
  REQUIRE(values.size() == 51);
  CHECK(std::is_sorted(values.begin(), values.end()));
  const auto rows = run_sweep(sp, SweepAxis::Ratio, values);
  REQUIRE(rows.size() == 51);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.argmin; }) == 1);
  const auto best = std::find_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.argmin; });
  for (const auto& r : rows) CHECK(best->measured <= r.measured);
  std::ostringstream os;
  write_csv(os, rows);
  CHECK(count_lines(os.str()) == 52);
}

TEST_CASE("block size sweep lowers cursor operations") {
  ExperimentSpec sp = small_spec(16384);
  const std::vector<double> sizes{64, 128, 256, 512, 1024, 2048, 4096, 8192};
  const auto rows = run_sweep(sp, SweepAxis::BlockSize, sizes);
  REQUIRE(rows.size() == sizes.size());
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].cursor_ops <= rows[i - 1].cursor_ops);
  for (const auto& r : rows) CHECK(r.result_count == rows[0].result_count);
}

TEST_CASE("axis names") {
  for (SweepAxis a : {SweepAxis::Ratio, SweepAxis::BlockSize, SweepAxis::Selectivity, SweepAxis::BuildSize,
                      SweepAxis::Groups}) {
    CHECK(parse_axis(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_axis("colour"), std::invalid_argument);
}

TEST_CASE("Monte Carlo runs are sorted and written one per line") {
  const ExperimentSpec sp = small_spec(16384);
  const Inputs in = make_inputs(sp);
  const Engine eng(in.r, in.s, sp.cfg, sp.truth);
  const PhaseData* build = eng.phases(Scheme::PL)[0];
  const MonteCarloResult mc = monte_carlo(eng, build, 200, 7, SearchOptions{});
  REQUIRE(mc.runs.size() == 200);
  for (std::size_t i = 1; i < mc.runs.size(); ++i) CHECK(mc.runs[i - 1].measured <= mc.runs[i].measured);
  CHECK(mc.percentile5 == mc.runs[9].measured);
  CHECK(mc.within_tolerance >= 0.0);
  CHECK(mc.within_tolerance <= 1.0);
  CHECK(mc.searched.size() == build->nsteps());
  std::ostringstream os;
  write_monte_carlo_csv(os, mc);
  CHECK(count_lines(os.str()) == 202);
  CHECK(os.str().starts_with("phase,rank,cdf,ratios,predicted,measured,rel_error\n"));
  CHECK_THROWS_AS(monte_carlo(eng, build, 0, 7, SearchOptions{}), std::invalid_argument);
}
