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

#include "hjcp/device.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "hjcp/kernels.hpp"
#include "hjcp/partition.hpp"

namespace hjcp {

double DeviceProfile::instr(StepId s) const {
  const double v = instr_per_item[index(s)];
  if (std::isnan(v)) {
    throw MissingCalibration(fmt::format("{}: no instruction count for step {}", name, step_name(s)));
  }
  return v;
}

double DeviceProfile::mem(StepId s) const {
  const double v = mem_cost_per_item[index(s)];
  if (std::isnan(v)) {
    throw MissingCalibration(fmt::format("{}: no memory cost for step {}", name, step_name(s)));
  }
  return v;
}

void DeviceProfile::validate() const {
  if (worker_count == 0 || wavefront_width == 0) throw std::invalid_argument(name + ": lanes and W must be >= 1");
  if (!(ipc > 0) || !(clock_hz > 0)) throw std::invalid_argument(name + ": ipc and clock must be positive");
  for (std::size_t i = 0; i < kStepCount; ++i) {
    if (instr_per_item[i] < 0 || mem_cost_per_item[i] < 0) {
      throw std::invalid_argument(name + ": negative cost");
    }
  }
  if (atomic_cost < 0) throw std::invalid_argument(name + ": negative atomic cost");
}

double transfer_time(const TransferLink& link, double bytes) {
  if (!link.enabled) return 0.0;
  return link.latency + bytes / link.bandwidth;
}

double simulate_step(const DeviceProfile& profile, std::span<const double> lane_costs) {
  const std::size_t w = profile.wavefront_width;
  double total = 0.0;
  for (std::size_t a = 0; a < lane_costs.size(); a += w) {
    const std::size_t b = std::min(lane_costs.size(), a + w);
    total += *std::max_element(lane_costs.begin() + static_cast<std::ptrdiff_t>(a),
                               lane_costs.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return total / profile.slots();
}

CannedProfiles canned_profiles() {
  CannedProfiles p;
  auto set = [](DeviceProfile& d, StepId s, double instr, double mem_ns) {
    d.instr_per_item[index(s)] = instr;
    d.mem_cost_per_item[index(s)] = mem_ns * 1e-9;
  };

  DeviceProfile& c = p.cpu;
  c.name = "cpu-like";
  c.worker_count = 4;
  c.wavefront_width = 1;
  c.ipc = 8.0;
  c.clock_hz = 3.0e9;
  c.atomic_cost = 60e-9;
  set(c, StepId::B1, 48, 0.4);
  set(c, StepId::B2, 12, 28.0);
  set(c, StepId::B3, 24, 30.0);
  set(c, StepId::B4, 16, 24.0);
  set(c, StepId::P1, 48, 0.4);
  set(c, StepId::P2, 12, 28.0);
  set(c, StepId::P3, 24, 30.0);
  set(c, StepId::P4, 20, 25.0);
  set(c, StepId::N1, 56, 0.4);
  set(c, StepId::N2, 8, 2.0);
  set(c, StepId::N3, 16, 10.0);

  DeviceProfile& g = p.gpu;
  g.name = "gpu-like";
  g.worker_count = 400;
  g.wavefront_width = 64;
  g.ipc = 400.0;
  g.clock_hz = 0.6e9;
  g.atomic_cost = 120e-9;
  set(g, StepId::B1, 24, 0.05);
  set(g, StepId::B2, 12, 12.0);
  set(g, StepId::B3, 36, 8.0);
  set(g, StepId::B4, 16, 14.0);
  set(g, StepId::P1, 24, 0.05);
  set(g, StepId::P2, 12, 12.0);
  set(g, StepId::P3, 36, 8.0);
  set(g, StepId::P4, 24, 40.0);
  set(g, StepId::N1, 32, 0.05);
  set(g, StepId::N2, 8, 2.5);
  set(g, StepId::N3, 16, 8.0);
  return p;
}

DeviceProfile calibrate_units(const DeviceProfile& profile, StepId step,
                              std::span<const std::uint32_t> units, const CalibrationOptions& opt) {
  if (units.size() < static_cast<std::size_t>(kCalibrationRepetitions)) {
    throw std::invalid_argument(fmt::format("calibration sample of {} items is below {}", units.size(),
                                            kCalibrationRepetitions));
  }
  if (opt.mode != Measurement::Logical) {
    throw std::invalid_argument("calibrate_units measures logical time only");
  }
  const std::size_t n = std::min(units.size(), opt.max_sample);
  const double compute = profile.compute_per_unit(step);
  const double mem = profile.mem(step) * (opt.co_run ? 1.0 + opt.contention : 1.0);
  std::vector<double> lane(n);
  double total_units = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lane[i] = profile.worker_count * (compute + mem) * units[i];
    total_units += units[i];
  }
  std::array<double, kCalibrationRepetitions> reps{};
  for (auto& r : reps) r = simulate_step(profile, lane);
  std::nth_element(reps.begin(), reps.begin() + kCalibrationRepetitions / 2, reps.end());
  const double per_unit = reps[kCalibrationRepetitions / 2] / total_units;

  DeviceProfile out = profile;
  out.mem_cost_per_item[index(step)] = std::max(0.0, per_unit - compute);
  out.origin = "calibrated(logical)";
  return out;
}

namespace {

// Work units of each step when the sample is joined with itself.
std::vector<std::uint32_t> sample_units(StepId step, const Relation& sample) {
  std::vector<std::uint32_t> u(sample.size(), 1);
  if (step != StepId::B3 && step != StepId::P3 && step != StepId::P4) return u;
  Arena arena(table_arena_bytes(sample.size() + 1, kDefaultBlockSize, 1));
  WorkGroupAllocator alloc(arena, kDefaultBlockSize);
  HashTable t(next_pow2(sample.size()), arena);
  for (std::size_t i = 0; i < sample.size(); ++i) t.insert(sample.keys[i], sample.rids[i], alloc);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const std::uint32_t b = t.bucket_of(sample.keys[i]);
    if (step == StepId::P4) {
      const std::uint32_t node = t.find_key(b, sample.keys[i]);
      u[i] = std::max(1U, node == kNone ? 0U : t.key_node(node).rid_count);
    } else {
      u[i] = std::max(1U, t.bucket(b).key_count.load());
    }
  }
  return u;
}

// Wall-clock seconds of one step kernel over the whole sample.
double host_step_seconds(StepId step, const Relation& sample) {
  using clock = std::chrono::steady_clock;
  DeviceLocal dev(0, kDefaultBlockSize);
  const std::size_t n = sample.size();
  auto elapsed = [](clock::time_point a) {
    return std::chrono::duration<double>(clock::now() - a).count();
  };
  const bool build = index(step) <= index(StepId::B4);
  const bool probe = index(step) >= index(StepId::P1) && index(step) <= index(StepId::P4);
  if (build || probe) {
    Arena arena(table_arena_bytes(n + 1, kDefaultBlockSize, dev.workers()));
    HashTable t(next_pow2(n), arena);
    BuildCtx b;
    b.init(sample, t, nullptr, TableMode::Shared);
    double secs = 0.0;
    for (StepId s : kBuildSeries) {
      auto t0 = clock::now();
      run_build_step(s, b, dev, 0, n);
      if (s == step) secs = elapsed(t0);
    }
    if (build) return secs;
    ProbeCtx p;
    p.init(sample, t);
    for (StepId s : kProbeSeries) {
      auto t0 = clock::now();
      run_probe_step(s, p, dev, 0, n);
      if (s == step) secs = elapsed(t0);
    }
    return secs;
  }
  if (step == StepId::N1 || step == StepId::N2 || step == StepId::N3) {
    PartitionPassCtx ctx;
    Arena arena(partition_arena_bytes(n, 64, ctx.block_bytes, kDefaultBlockSize, dev.workers()));
    ctx.init(sample, n, 6, arena, kDefaultHashSeed);
    double secs = 0.0;
    for (StepId s : kPartitionSeries) {
      auto t0 = clock::now();
      run_partition_step(s, ctx, dev, 0, n);
      if (s == step) secs = elapsed(t0);
    }
    return secs;
  }
  throw std::invalid_argument("step cannot be calibrated on the host");
}

}  // namespace

DeviceProfile calibrate(const DeviceProfile& profile, StepId step, const Relation& sample,
                        const CalibrationOptions& opt) {
  if (sample.size() < static_cast<std::size_t>(kCalibrationRepetitions)) {
    throw std::invalid_argument(fmt::format("calibration sample of {} items is below {}",
                                            sample.size(), kCalibrationRepetitions));
  }
  const auto units = sample_units(step, sample);
  if (opt.mode == Measurement::Logical) return calibrate_units(profile, step, units, opt);

  std::array<double, kCalibrationRepetitions> reps{};
  for (auto& r : reps) r = host_step_seconds(step, sample);
  std::nth_element(reps.begin(), reps.begin() + kCalibrationRepetitions / 2, reps.end());
  double total_units = 0.0;
  for (auto u : units) total_units += u;
  DeviceProfile out = profile;
  const double per_unit = reps[kCalibrationRepetitions / 2] / total_units;
  out.mem_cost_per_item[index(step)] = std::max(0.0, per_unit - profile.compute_per_unit(step));
  out.origin = "calibrated(host, wall clock)";
  return out;
}

ProfileSet default_profile_set() {
  auto c = canned_profiles();
  return ProfileSet{c.cpu, c.gpu, SystemParams{}};
}

namespace {

void emit_device(std::ostringstream& os, const std::string& p, const DeviceProfile& d) {
  os << p << "name=" << d.name << "\n";
  os << p << "origin=" << d.origin << "\n";
  os << p << "worker_count=" << d.worker_count << "\n";
  os << p << "wavefront_width=" << d.wavefront_width << "\n";
  os << fmt::format("{}ipc={}\n{}clock_hz={}\n{}atomic_cost={}\n", p, d.ipc, p, d.clock_hz, p,
                    d.atomic_cost);
  for (std::size_t i = 0; i < kStepCount; ++i) {
    if (!std::isnan(d.instr_per_item[i])) os << fmt::format("{}instr.{}={}\n", p, kStepNames[i], d.instr_per_item[i]);
    if (!std::isnan(d.mem_cost_per_item[i])) os << fmt::format("{}mem.{}={}\n", p, kStepNames[i], d.mem_cost_per_item[i]);
  }
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("profile: bad number for " + key + ": " + v);
  return d;
}

bool apply_device(DeviceProfile& d, const std::string& key, const std::string& v) {
  if (key == "name") d.name = v;
  else if (key == "origin") d.origin = v;
  else if (key == "worker_count") d.worker_count = static_cast<unsigned>(to_double(key, v));
  else if (key == "wavefront_width") d.wavefront_width = static_cast<unsigned>(to_double(key, v));
  else if (key == "ipc") d.ipc = to_double(key, v);
  else if (key == "clock_hz") d.clock_hz = to_double(key, v);
  else if (key == "atomic_cost") d.atomic_cost = to_double(key, v);
  else if (key.starts_with("instr.") || key.starts_with("mem.")) {
    const bool instr = key.starts_with("instr.");
    auto s = parse_step(key.substr(instr ? 6 : 4));
    if (!s) return false;
    (instr ? d.instr_per_item : d.mem_cost_per_item)[index(*s)] = to_double(key, v);
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::string format_profiles(const ProfileSet& set) {
  std::ostringstream os;
  os << "# hjcp device profiles; costs are aggregate seconds per work unit\n";
  emit_device(os, "cpu.", set.cpu);
  emit_device(os, "gpu.", set.gpu);
  const auto& s = set.system;
  os << fmt::format("contention={}\nregroup_cost={}\ndispatch_cost={}\ncopy_bandwidth={}\n", s.contention,
                    s.regroup_cost, s.dispatch_cost, s.copy_bandwidth);
  os << fmt::format("link.latency={}\nlink.bandwidth={}\n", s.link.latency, s.link.bandwidth);
  return os.str();
}

ProfileSet parse_profiles(const std::string& text, const ProfileSet& defaults) {
  ProfileSet set = defaults;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(fmt::format("profile line {}: missing '='", lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    bool ok = true;
    if (key.starts_with("cpu.")) ok = apply_device(set.cpu, key.substr(4), val);
    else if (key.starts_with("gpu.")) ok = apply_device(set.gpu, key.substr(4), val);
    else if (key == "contention") set.system.contention = to_double(key, val);
    else if (key == "regroup_cost") set.system.regroup_cost = to_double(key, val);
    else if (key == "dispatch_cost") set.system.dispatch_cost = to_double(key, val);
    else if (key == "copy_bandwidth") set.system.copy_bandwidth = to_double(key, val);
    else if (key == "link.latency") set.system.link.latency = to_double(key, val);
    else if (key == "link.bandwidth") set.system.link.bandwidth = to_double(key, val);
    else ok = false;
    if (!ok) throw std::invalid_argument(fmt::format("profile line {}: unknown key '{}'", lineno, key));
  }
  set.cpu.validate();
  set.gpu.validate();
  if (!(set.system.link.bandwidth > 0) || set.system.link.latency < 0) {
    throw std::invalid_argument("profile: link needs latency >= 0 and bandwidth > 0");
  }
  return set;
}

void write_profiles(const std::filesystem::path& path, const ProfileSet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_profiles(set);
}

ProfileSet read_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profiles(ss.str(), default_profile_set());
}

}  // namespace hjcp
