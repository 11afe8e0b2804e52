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

#include "hjcp/scheduler.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hjcp {

std::vector<double> ratio_grid(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(1.0 / delta + 1e-9));
  std::vector<double> g;
  g.reserve(k + 2);
  for (std::size_t j = k + 1; j-- > 0;) {
    const double v = static_cast<double>(j) * delta;
    g.push_back(std::abs(v - 1.0) < 1e-9 ? 1.0 : v);
  }
  if (g.front() != 1.0) g.insert(g.begin(), 1.0);
  return g;
}

PhaseChoice search_fixed(const PhaseModel& m, double r) {
  PhaseChoice c;
  c.r.assign(m.phase->nsteps(), r);
  c.total = predict(m, c.r).total();
  c.nodes = 1;
  return c;
}

PhaseChoice search_dd(const PhaseModel& m, double delta) {
  PhaseChoice best;
  bool have = false;
  std::vector<double> r(m.phase->nsteps());
  for (double v : ratio_grid(delta)) {
    std::fill(r.begin(), r.end(), v);
    const double t = predict(m, r).total();
    ++best.nodes;
    if (!have || t < best.total) {
      best.r = r;
      best.total = t;
      have = true;
    }
  }
  return best;
}

PhaseChoice search_ol(const PhaseModel& m) {
  const std::size_t n = m.phase->nsteps();
  PhaseChoice best;
  if (m.arch == Arch::Coupled) {
    const double x = static_cast<double>(m.phase->x());
    best.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const StepId s = m.phase->series.steps[i];
      const double u = m.phase->stats.avg_units[i];
      const double c = comp_time(m.cpu, s, 1.0, x, u) + mem_time(m.cpu, s, 1.0, x, u);
      const double g = comp_time(m.gpu, s, 1.0, x, u) + mem_time(m.gpu, s, 1.0, x, u);
      best.r[i] = g < c ? 0.0 : 1.0;
    }
    best.total = predict(m, best.r).total();
    best.nodes = 1;
    return best;
  }
  std::vector<double> r(n);
  for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
    for (std::size_t i = 0; i < n; ++i) r[i] = (k >> i) & 1U ? 0.0 : 1.0;
    const double t = predict(m, r).total();
    if (best.nodes++ == 0 || t < best.total) {
      best.r = r;
      best.total = t;
    }
  }
  return best;
}

namespace {

struct PlSearch {
  const PhaseModel& m;
  const std::vector<double>& grid;
  const SearchOptions& opt;
  std::vector<double> r;
  PhaseChoice best;

  void visit(std::size_t depth) {
    const std::size_t n = m.phase->nsteps();
    for (double v : grid) {
      if (best.nodes >= opt.node_budget) {
        best.budget_exhausted = true;
        return;
      }
      ++best.nodes;
      r[depth] = v;
      if (depth + 1 == n) {
        const double t = predict(m, r).total();
        // Grid runs from large to small CPU shares, so a lexicographically
        // larger vector comes first in enumeration order.
        if (t < best.total || (t == best.total && r > best.r)) {
          best.total = t;
          best.r = r;
        }
        continue;
      }
      if (!opt.exhaustive &&
          prefix_bound(m, std::span<const double>(r.data(), depth + 1)) > best.total) {
        continue;
      }
      visit(depth + 1);
    }
  }
};

}  // namespace

PhaseChoice search_pl(const PhaseModel& m, const SearchOptions& opt) {
  const auto grid = ratio_grid(opt.delta);
  PlSearch s{m, grid, opt, std::vector<double>(m.phase->nsteps()), {}};
  if (opt.exhaustive) {
    s.best.total = INFINITY;
  } else {
    // The DD optimum seeds the incumbent; it lies on the same grid.
    s.best = search_dd(m, opt.delta);
    s.best.nodes = 0;
  }
  s.visit(0);
  return s.best;
}

std::string format_plan(const Plan& p) {
  std::ostringstream os;
  os.precision(17);
  os << "scheme " << to_string(p.scheme) << '\n';
  os << "table_mode " << to_string(p.table_mode) << '\n';
  os << "chunk_size " << p.chunk_size << '\n';
  for (const auto& ph : p.ratios) {
    os << "ratios";
    for (double v : ph) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

Plan parse_plan(const std::string& text) {
  Plan p;
  p.ratios.clear();
  std::istringstream is(text);
  std::string line;
  bool saw_scheme = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "scheme") {
      std::string v;
      ls >> v;
      p.scheme = parse_scheme(v);
      saw_scheme = true;
    } else if (key == "table_mode") {
      std::string v;
      ls >> v;
      p.table_mode = parse_table_mode(v);
    } else if (key == "chunk_size") {
      if (!(ls >> p.chunk_size)) throw std::invalid_argument("bad chunk_size in plan");
    } else if (key == "ratios") {
      std::vector<double> r;
      double v;
      while (ls >> v) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("plan ratio outside [0, 1]");
        r.push_back(v);
      }
      if (!ls.eof()) throw std::invalid_argument("bad ratio in plan: " + line);
      if (r.empty()) throw std::invalid_argument("empty ratio line in plan");
      p.ratios.push_back(std::move(r));
    } else {
      throw std::invalid_argument("unknown plan key: " + key);
    }
  }
  if (!saw_scheme) throw std::invalid_argument("plan has no scheme line");
  return p;
}

void write_plan(const std::string& path, const Plan& p) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write plan " + path);
  f << format_plan(p);
}

Plan read_plan(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read plan " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_plan(ss.str());
}

Scheme parse_scheme(const std::string& s) {
  for (Scheme v : {Scheme::CpuOnly, Scheme::GpuOnly, Scheme::OL, Scheme::DD, Scheme::PL,
                   Scheme::BasicUnit, Scheme::CoarsePL}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown scheme: " + s);
}

Algo parse_algo(const std::string& s) {
  if (s == "shj") return Algo::SHJ;
  if (s == "phj") return Algo::PHJ;
  throw std::invalid_argument("unknown algorithm: " + s);
}

Arch parse_arch(const std::string& s) {
  if (s == "coupled") return Arch::Coupled;
  if (s == "discrete") return Arch::Discrete;
  throw std::invalid_argument("unknown architecture: " + s);
}

TableMode parse_table_mode(const std::string& s) {
  if (s == "shared") return TableMode::Shared;
  if (s == "separate") return TableMode::Separate;
  throw std::invalid_argument("unknown table mode: " + s);
}

}  // namespace hjcp
