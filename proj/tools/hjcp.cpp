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

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hjcp/engine.hpp"
#include "hjcp/harness.hpp"
#include "hjcp/join.hpp"
#include "hjcp/largejoin.hpp"
#include "hjcp/lockbench.hpp"

using namespace hjcp;

namespace {

struct Common {
  std::string algo = "shj", scheme = "pl", arch = "coupled", table_mode = "shared";
  double delta = 0.02;
  std::size_t block_size = kDefaultBlockSize;
  unsigned groups = 1, pass_bits = 6, passes = 2;
  std::uint64_t seed = 1;
  std::size_t handoff_cap = 0, chunk_items = 0;
  std::string profile, out, plan_file, save_plan;

  void add(CLI::App* app) {
    app->add_option("--algo", algo, "shj | phj")->check(CLI::IsMember({"shj", "phj"}));
    app->add_option("--scheme", scheme, "cpu | gpu | ol | dd | pl | basicunit | coarsepl")
        ->check(CLI::IsMember({"cpu", "gpu", "ol", "dd", "pl", "basicunit", "coarsepl"}));
    app->add_option("--arch", arch, "coupled | discrete")->check(CLI::IsMember({"coupled", "discrete"}));
    app->add_option("--delta", delta, "ratio grid step")->check(CLI::Range(1e-6, 1.0));
    app->add_option("--block-size", block_size, "allocator block in bytes")->check(CLI::Range(8, 1 << 24));
    app->add_option("--groups", groups, "workload groups for the probe tail")->check(CLI::Range(1, 1 << 16));
    app->add_option("--pass-bits", pass_bits, "radix bits per pass")->check(CLI::Range(0, 24));
    app->add_option("--passes", passes, "partition passes")->check(CLI::Range(0, 24));
    app->add_option("--table-mode", table_mode, "shared | separate")->check(CLI::IsMember({"shared", "separate"}));
    app->add_option("--seed", seed, "hash / generator seed");
    app->add_option("--handoff-cap", handoff_cap, "outstanding cross-device items (0 = unbounded)");
    app->add_option("--chunk-items", chunk_items, "BasicUnit chunk in tuples (0 = automatic)");
    app->add_option("--profile", profile, "device profile file")->check(CLI::ExistingFile);
    app->add_option("--out", out, "output CSV");
  }

  EngineConfig config() const {
    EngineConfig c;
    c.algo = parse_algo(algo);
    c.arch = parse_arch(arch);
    c.table_mode = parse_table_mode(table_mode);
    c.block_size = block_size;
    c.groups = groups;
    c.pass_bits = pass_bits;
    c.passes = passes;
    c.seed = static_cast<std::uint32_t>(seed);
    c.handoff_cap = handoff_cap;
    c.chunk_items = chunk_items;
    return c;
  }
  ProfileSet truth() const { return profile.empty() ? default_profile_set() : read_profiles(profile); }
  SearchOptions search() const {
    SearchOptions s;
    s.delta = delta;
    return s;
  }
};

struct InputArgs {
  std::string r_file, s_file;
  std::size_t r_n = 1 << 16, s_n = 1 << 16;
  std::string dist = "uniform";
  unsigned s_percent = 10;
  double selectivity = 1.0;
  std::uint64_t gen_seed = 42;

  void add(CLI::App* app) {
    app->add_option("--r", r_file, "build relation file")->check(CLI::ExistingFile);
    app->add_option("--s", s_file, "probe relation file")->check(CLI::ExistingFile);
    app->add_option("--r-tuples", r_n, "generated build size");
    app->add_option("--s-tuples", s_n, "generated probe size");
    app->add_option("--dist", dist, "uniform | skewed")->check(CLI::IsMember({"uniform", "skewed"}));
    app->add_option("--skew", s_percent, "duplicate percentage for skewed keys")->check(CLI::Range(0, 50));
    app->add_option("--selectivity", selectivity, "probe keys found in R")->check(CLI::Range(0.0, 1.0));
    app->add_option("--gen-seed", gen_seed, "generator seed");
  }

  ExperimentSpec spec(const Common& c) const {
    ExperimentSpec sp;
    sp.r.n = r_n;
    sp.r.distribution = dist == "skewed" ? Distribution::Skewed : Distribution::Uniform;
    sp.r.s_percent = s_percent;
    sp.r.seed = gen_seed;
    sp.s.n = s_n;
    sp.s.seed = gen_seed + 1;
    sp.s.selectivity = selectivity;
    sp.cfg = c.config();
    sp.scheme = parse_scheme(c.scheme);
    sp.search = c.search();
    sp.truth = c.truth();
    return sp;
  }

  hjcp::Inputs load(const Common& c) const {
    if (!r_file.empty() != !s_file.empty()) throw CLI::ValidationError("--r and --s go together");
    if (!r_file.empty()) return {read_bin(r_file), read_bin(s_file)};
    return make_inputs(spec(c));
  }
};

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hjcp: heterogeneous hash-join co-processing engine"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a relation file");
  std::size_t gen_n = 1 << 16;
  std::string gen_dist = "uniform", gen_out, gen_build;
  unsigned gen_skew = 10;
  std::uint64_t gen_seed = 42, gen_lo = 0, gen_hi = 0xffffffffULL;
  std::optional<double> gen_sel;
  gen->add_option("--tuples", gen_n, "tuple count")->required();
  gen->add_option("--dist", gen_dist, "uniform | skewed")->check(CLI::IsMember({"uniform", "skewed"}));
  gen->add_option("--skew", gen_skew, "duplicate percentage")->check(CLI::Range(0, 50));
  gen->add_option("--key-lo", gen_lo, "smallest key");
  gen->add_option("--key-hi", gen_hi, "largest key")->check(CLI::Range(0ULL, 0xffffffffULL));
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--selectivity", gen_sel, "make a probe relation against --build")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--build", gen_build, "build relation for probe generation")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output relation file")->required();

  // join
  auto* join = app.add_subcommand("join", "plan and run one join");
  Common jc;
  InputArgs ji;
  bool verify = false, logical_only = false;
  jc.add(join);
  ji.add(join);
  join->add_option("--plan-file", jc.plan_file, "replay a saved plan")->check(CLI::ExistingFile);
  join->add_option("--save-plan", jc.save_plan, "write the chosen plan");
  join->add_flag("--verify", verify, "compare against the sort-merge oracle");
  join->add_flag("--logical-only", logical_only, "skip the functional run");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
  Common sc;
  InputArgs si;
  std::string axis = "ratio";
  std::vector<double> values;
  sc.add(sweep);
  si.add(sweep);
  sweep->add_option("--axis", axis, "ratio | block_size | selectivity | build_size | groups")
      ->check(CLI::IsMember({"ratio", "block_size", "selectivity", "build_size", "groups"}));
  sweep->add_option("--values", values, "grid points (default: axis grid)")->delimiter(',');
  sweep->add_flag("--logical-only", logical_only, "skip functional runs");

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "random ratio vectors against the simulator");
  Common mcc;
  InputArgs mci;
  std::size_t runs = 1000;
  std::string phase_name = "build";
  std::uint64_t mc_seed = 7;
  mcc.add(mc);
  mci.add(mc);
  mc->add_option("--runs", runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
  mc->add_option("--phase", phase_name, "phase name (build, probe, probe-head, probe-tail, partitionN)");
  mc->add_option("--mc-seed", mc_seed, "ratio RNG seed");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "re-derive per-step unit costs");
  std::string cal_mode = "logical", cal_in, cal_out;
  std::size_t cal_sample = 1 << 16;
  cal->add_option("--mode", cal_mode, "logical | host")->check(CLI::IsMember({"logical", "host"}));
  cal->add_option("--sample", cal_sample, "sample tuples")->check(CLI::Range(16, 1 << 24));
  cal->add_option("--profile", cal_in, "starting profile file")->check(CLI::ExistingFile);
  cal->add_option("--out", cal_out, "calibrated profile file")->required();

  // lockbench
  auto* lock = app.add_subcommand("lockbench", "latched counter increments (wall clock)");
  std::vector<std::size_t> lock_n = {1, 16, 256, 4096, 65536, 1 << 20, 1 << 24};
  std::vector<std::size_t> lock_k = {256};
  std::vector<std::string> lock_dist = {"uniform", "low-skew", "high-skew"};
  std::size_t lock_x = 1 << 24;
  std::string lock_out;
  std::uint64_t lock_seed = 1;
  lock->add_option("--n", lock_n, "array sizes")->delimiter(',');
  lock->add_option("--k", lock_k, "logical threads")->delimiter(',');
  lock->add_option("--x", lock_x, "total increments")->check(CLI::PositiveNumber);
  lock->add_option("--dist", lock_dist, "uniform | low-skew | high-skew")
      ->delimiter(',')
      ->check(CLI::IsMember({"uniform", "low-skew", "high-skew"}));
  lock->add_option("--seed", lock_seed, "slot RNG seed");
  lock->add_option("--out", lock_out, "output CSV");

  // largejoin
  auto* large = app.add_subcommand("largejoin", "join inputs larger than the buffer");
  Common lc;
  InputArgs li;
  std::size_t buffer = 512ULL << 20, chunk = 16ULL << 20;
  unsigned max_passes = 2;
  lc.add(large);
  li.add(large);
  large->add_option("--buffer", buffer, "buffer capacity in bytes")->check(CLI::PositiveNumber);
  large->add_option("--chunk", chunk, "partitioning chunk in tuples")->check(CLI::PositiveNumber);
  large->add_option("--max-passes", max_passes, "external partitioning passes")->check(CLI::Range(1, 4));
  large->add_flag("--verify", verify, "compare against the sort-merge oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      Relation rel;
      if (gen_sel) {
        if (gen_build.empty()) throw CLI::ValidationError("--selectivity needs --build");
        rel = gen_probe(read_bin(gen_build), gen_n, *gen_sel, gen_seed);
      } else {
        GenSpec g;
        g.n = gen_n;
        g.distribution = gen_dist == "skewed" ? Distribution::Skewed : Distribution::Uniform;
        g.s_percent = gen_skew;
        g.key_range = KeyRange{gen_lo, gen_hi};
        g.seed = gen_seed;
        rel = generate(g);
      }
      write_bin(gen_out, rel);
      fmt::print("wrote {} tuples to {}\n", rel.size(), gen_out);
    } else if (*join) {
      const auto in = ji.load(jc);
      EngineConfig cfg = jc.config();
      std::optional<Plan> replay;
      if (!jc.plan_file.empty()) {
        replay = read_plan(jc.plan_file);
        cfg.table_mode = replay->table_mode;
        if (replay->scheme == Scheme::BasicUnit) cfg.chunk_items = replay->chunk_size;
      }
      const Engine eng(in.r, in.s, cfg, jc.truth());
      const Plan plan = replay ? *replay : eng.plan(parse_scheme(jc.scheme), jc.search());
      if (!jc.save_plan.empty()) write_plan(jc.save_plan, plan);
      if (plan.budget_exhausted) fmt::print(stderr, "warning: plan search budget exhausted\n");
      const auto rep = eng.execute(plan, !logical_only);
      std::ofstream f;
      write_csv(out_stream(jc.out, f), {make_row("join", eng, rep, jc.delta)});
      fmt::print(stderr, "plan {}  result {} pairs  logical {:.6f} s\n", format_ratios(plan), rep.result_count,
                 rep.total());
      if (verify) {
        const bool ok = rep.functional ? same_multiset(rep.result, sort_join_oracle(in.r, in.s))
                                       : rep.result_count == join_count_oracle(in.r, in.s);
        fmt::print(stderr, "oracle: {}\n", ok ? "match" : "MISMATCH");
        if (!ok) return 2;
      }
    } else if (*sweep) {
      ExperimentSpec sp = si.spec(sc);
      sp.functional = !logical_only;
      const SweepAxis ax = parse_axis(axis);
      const auto vals = values.empty() ? default_axis_values(ax, sp) : values;
      std::ofstream f;
      write_csv(out_stream(sc.out, f), run_sweep(sp, ax, vals));
    } else if (*mc) {
      const auto in = mci.load(mcc);
      const Engine eng(in.r, in.s, mcc.config(), mcc.truth());
      const PhaseData* ph = nullptr;
      for (const auto& p : eng.workload().fine) {
        if (p.series.name == phase_name) ph = &p;
      }
      if (!ph) throw CLI::ValidationError("no phase named " + phase_name);
      const auto res = monte_carlo(eng, ph, runs, mc_seed, mcc.search());
      std::ofstream f;
      write_monte_carlo_csv(out_stream(mcc.out, f), res);
      fmt::print(stderr, "{:.1f}% of runs within 15%; searched plan at quantile {:.3f} (p5 {:.6f} s, plan {:.6f} s)\n",
                 100.0 * res.within_tolerance, res.searched_quantile, res.percentile5, res.searched_measured);
    } else if (*cal) {
      ProfileSet set = cal_in.empty() ? default_profile_set() : read_profiles(cal_in);
      CalibrationOptions opt;
      opt.mode = cal_mode == "host" ? Measurement::Host : Measurement::Logical;
      opt.contention = set.system.contention;
      opt.max_sample = cal_sample;
      const Relation sample = gen_uniform(cal_sample, KeyRange{0, cal_sample - 1}, 99);
      for (std::size_t i = 0; i + 1 < kStepCount; ++i) {
        const auto st = static_cast<StepId>(i);
        set.cpu = calibrate(set.cpu, st, sample, opt);
        set.gpu = calibrate(set.gpu, st, sample, opt);
      }
      if (opt.mode == Measurement::Host) {
        set.cpu.origin = set.gpu.origin = "measured";
        fmt::print(stderr, "host calibration uses wall-clock measurements\n");
      }
      write_profiles(cal_out, set);
      fmt::print("wrote {}\n", cal_out);
    } else if (*lock) {
      std::ofstream f;
      auto& os = out_stream(lock_out, f);
      os << "n,k,x,distribution,os_threads,total,torn,checks,seconds_wall\n";
      for (const auto& d : lock_dist) {
        const unsigned skew = d == "uniform" ? 0 : d == "low-skew" ? 10 : 25;
        for (std::size_t k : lock_k) {
          for (std::size_t n : lock_n) {
            LockBenchSpec spec;
            spec.n = n;
            spec.k = k;
            spec.x = lock_x;
            spec.skew = skew;
            spec.seed = lock_seed;
            const auto r = run_lockbench(spec);
            os << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.n, r.k, r.x, r.dist, r.os_threads, r.total, r.torn,
                              r.checks, r.seconds);
          }
        }
      }
    } else if (*large) {
      const auto in = li.load(lc);
      LargeJoinOptions opt;
      opt.buffer_bytes = buffer;
      opt.chunk_tuples = chunk;
      opt.pass_bits = lc.pass_bits;
      opt.max_passes = max_passes;
      opt.pair_cfg = lc.config();
      opt.scheme = parse_scheme(lc.scheme);
      opt.search = lc.search();
      const auto rep = large_join(in.r, in.s, lc.truth(), opt);
      std::ofstream f;
      auto& os = out_stream(lc.out, f);
      os << "r_tuples,s_tuples,buffer,in_buffer,bits,passes,chunk,chunks,pairs,spilled_bytes,copy_time,"
            "partition_time,join_time,total,result_count\n";
      os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", in.r.size(), in.s.size(), buffer,
                        rep.in_buffer ? 1 : 0, rep.bits, rep.passes, rep.chunk_tuples, rep.chunks, rep.pairs,
                        rep.spilled_bytes, rep.copy_time, rep.partition_time, rep.join_time, rep.total(),
                        rep.result.size());
      if (verify) {
        const bool ok = same_multiset(rep.result, sort_join_oracle(in.r, in.s));
        fmt::print(stderr, "oracle: {}\n", ok ? "match" : "MISMATCH");
        if (!ok) return 2;
      }
    }
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
