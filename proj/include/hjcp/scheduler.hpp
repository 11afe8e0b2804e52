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
#include <iosfwd>
#include <string>
#include <vector>

#include "hjcp/costmodel.hpp"
#include "hjcp/workload.hpp"

namespace hjcp {

struct Plan {
  Scheme scheme = Scheme::PL;
  std::vector<std::vector<double>> ratios;  // per phase, per step: CPU share
  TableMode table_mode = TableMode::Shared;
  std::size_t chunk_size = 0;  // BasicUnit only
  bool budget_exhausted = false;
};

struct SearchOptions {
  double delta = 0.02;
  bool exhaustive = false;           // PL: no pruning
  std::size_t node_budget = 1 << 24;  // PL: visited prefixes per phase
};

struct PhaseChoice {
  std::vector<double> r;
  double total = 0.0;
  bool budget_exhausted = false;
  std::size_t nodes = 0;
};

// r values of the grid, largest CPU share first. Always holds 1 and 0.
std::vector<double> ratio_grid(double delta);

PhaseChoice search_fixed(const PhaseModel& m, double r);
PhaseChoice search_dd(const PhaseModel& m, double delta);
PhaseChoice search_ol(const PhaseModel& m);
PhaseChoice search_pl(const PhaseModel& m, const SearchOptions& opt);

std::string format_plan(const Plan& p);
Plan parse_plan(const std::string& text);
void write_plan(const std::string& path, const Plan& p);
Plan read_plan(const std::string& path);

Scheme parse_scheme(const std::string& s);
Algo parse_algo(const std::string& s);
Arch parse_arch(const std::string& s);
TableMode parse_table_mode(const std::string& s);

}  // namespace hjcp
