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

#include "hjcp/workload.hpp"

#include <algorithm>
#include <stdexcept>

#include "hjcp/grouping.hpp"

namespace hjcp {

std::string to_string(Algo a) { return a == Algo::SHJ ? "shj" : "phj"; }
std::string to_string(Arch a) { return a == Arch::Coupled ? "coupled" : "discrete"; }
std::string to_string(TableMode m) { return m == TableMode::Shared ? "shared" : "separate"; }
std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::CpuOnly: return "cpu";
    case Scheme::GpuOnly: return "gpu";
    case Scheme::OL: return "ol";
    case Scheme::DD: return "dd";
    case Scheme::PL: return "pl";
    case Scheme::BasicUnit: return "basicunit";
    case Scheme::CoarsePL: return "coarsepl";
  }
  return "?";
}

std::size_t bucket_count_for(std::size_t build_size, unsigned radix_bits) {
  return std::max(next_pow2(build_size), std::size_t{1} << radix_bits);
}

std::vector<const PhaseData*> Workload::schedule(Scheme scheme) const {
  std::vector<const PhaseData*> out;
  if (scheme == Scheme::CoarsePL) {
    if (cfg.algo != Algo::PHJ) throw std::invalid_argument("coarse scheduling needs PHJ");
    for (const auto& p : fine) {
      if (p.series.kind == PhaseKind::Partition) out.push_back(&p);
    }
    out.push_back(&coarse);
    return out;
  }
  for (const auto& p : fine) out.push_back(&p);
  return out;
}

namespace {

void finish_stats(PhaseData& ph) {
  for (std::size_t i = 0; i < ph.nsteps(); ++i) {
    const auto& u = ph.units[i];
    if (u.empty() || ph.x() == 0) {
      ph.stats.avg_units[i] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (auto v : u) sum += v;
    ph.stats.avg_units[i] = sum / static_cast<double>(ph.x());
  }
}

PhaseData make_phase(std::string name, PhaseKind kind, std::vector<StepId> steps, std::size_t x) {
  PhaseData ph;
  ph.series = StepSeries{std::move(name), kind, std::move(steps), x, true};
  ph.units.resize(ph.series.steps.size());
  return ph;
}

}  // namespace

PhaseData partition_phase(std::size_t x, unsigned pass) {
  auto ph = make_phase("partition" + std::to_string(pass + 1), PhaseKind::Partition, kPartitionSeries, x);
  finish_stats(ph);
  return ph;
}

Workload prepare(const Relation& r, const Relation& s, const EngineConfig& cfg) {
  if (cfg.groups == 0) throw std::invalid_argument("groups must be >= 1");
  if (cfg.algo == Algo::PHJ && cfg.pass_bits * cfg.passes > 24) {
    throw std::invalid_argument("pass_bits * passes must be <= 24");
  }
  Workload w;
  w.cfg = cfg;
  w.r = &r;
  w.s = &s;
  const unsigned bits = cfg.radix_bits();
  w.partitions = std::size_t{1} << bits;

  if (cfg.algo == Algo::PHJ) {
    w.parts = radix_partition_pair(r, s, cfg.pass_bits, cfg.passes, cfg.seed, cfg.block_size);
    for (unsigned p = 0; p < cfg.passes && cfg.pass_bits > 0; ++p) {
      w.fine.push_back(partition_phase(r.size() + s.size(), p));
    }
  }

  const Relation& br = w.build_input();
  const Relation& pr = w.probe_input();
  w.num_buckets = bucket_count_for(br.size(), bits);

  Arena arena(table_arena_bytes(br.size() + 1, cfg.block_size, 1));
  WorkGroupAllocator alloc(arena, cfg.block_size);
  HashTable table(BucketMap::partitioned(w.num_buckets, bits), arena, cfg.seed);

  auto build = make_phase("build", PhaseKind::Build, kBuildSeries, br.size());
  build.new_key.assign(br.size(), 0);
  std::vector<std::uint32_t> bucket_of(br.size());
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const std::uint32_t b = table.bucket_of(br.keys[i]);
    bucket_of[i] = b;
    if (table.find_key(b, br.keys[i]) == kNone) {
      build.new_key[i] = 1;
      ++distinct;
    }
    table.insert(br.keys[i], br.rids[i], alloc);
  }
  auto& b3 = build.units[2];
  b3.resize(br.size());
  for (std::size_t i = 0; i < br.size(); ++i) {
    b3[i] = std::max(1U, table.bucket(bucket_of[i]).key_count.load(std::memory_order_relaxed));
  }
  build.stats.new_key_fraction = br.empty() ? 0.0 : static_cast<double>(distinct) / br.size();
  build.stats.header_bytes = static_cast<double>(w.num_buckets * sizeof(BucketHeader));
  build.stats.node_bytes = static_cast<double>(distinct * sizeof(KeyNode) + br.size() * sizeof(RidNode));
  finish_stats(build);
  const PhaseStats table_stats = build.stats;

  std::vector<std::uint32_t> key_len(pr.size()), rid_len(pr.size()), pairs(pr.size());
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const std::uint32_t b = table.bucket_of(pr.keys[i]);
    key_len[i] = table.bucket(b).key_count.load(std::memory_order_relaxed);
    const std::uint32_t node = table.find_key(b, pr.keys[i]);
    pairs[i] = node == kNone ? 0 : table.key_node(node).rid_count;
    rid_len[i] = std::max(1U, pairs[i]);
    w.matches += pairs[i];
  }

  auto probe_stats = [&](PhaseData& ph) {
    ph.stats.header_bytes = table_stats.header_bytes;
    ph.stats.node_bytes = table_stats.node_bytes;
    ph.stats.pairs_per_item = pr.empty() ? 0.0 : static_cast<double>(w.matches) / pr.size();
    finish_stats(ph);
  };

  // Coarse units are taken before grouping reorders anything.
  if (cfg.algo == Algo::PHJ) {
    w.coarse = make_phase("pairs", PhaseKind::Coarse, {StepId::J}, w.partitions);
    w.coarse.coarse_units.assign(w.partitions, {});
    for (std::size_t p = 0; p < w.partitions; ++p) {
      auto& cu = w.coarse.coarse_units[p];
      const std::size_t r0 = w.parts.r.offsets[p], r1 = w.parts.r.offsets[p + 1];
      const std::size_t s0 = w.parts.s.offsets[p], s1 = w.parts.s.offsets[p + 1];
      double b3sum = 0, p3sum = 0, p4sum = 0;
      for (std::size_t i = r0; i < r1; ++i) b3sum += b3[i];
      for (std::size_t i = s0; i < s1; ++i) {
        p3sum += std::max(1U, key_len[i]);
        p4sum += rid_len[i];
      }
      const auto nr = static_cast<float>(r1 - r0), ns = static_cast<float>(s1 - s0);
      cu[index(StepId::B1)] = nr;
      cu[index(StepId::B2)] = nr;
      cu[index(StepId::B3)] = static_cast<float>(b3sum);
      cu[index(StepId::B4)] = nr;
      cu[index(StepId::P1)] = ns;
      cu[index(StepId::P2)] = ns;
      cu[index(StepId::P3)] = static_cast<float>(p3sum);
      cu[index(StepId::P4)] = static_cast<float>(p4sum);
    }
    w.coarse.pairs.resize(w.partitions);
    for (std::size_t p = 0; p < w.partitions; ++p) {
      std::uint64_t n = 0;
      for (std::size_t i = w.parts.s.offsets[p]; i < w.parts.s.offsets[p + 1]; ++i) n += pairs[i];
      w.coarse.pairs[p] = static_cast<std::uint32_t>(n);
    }
    w.coarse.stats = table_stats;
    w.coarse.stats.pairs_per_item =
        w.partitions ? static_cast<double>(w.matches) / static_cast<double>(w.partitions) : 0.0;
    w.coarse.stats.avg_units[0] = 1.0;
  }

  w.fine.push_back(std::move(build));

  std::vector<std::uint32_t> p3(pr.size());
  for (std::size_t i = 0; i < pr.size(); ++i) p3[i] = std::max(1U, key_len[i]);

  if (cfg.groups <= 1) {
    auto probe = make_phase("probe", PhaseKind::Probe, kProbeSeries, pr.size());
    probe.units[2] = std::move(p3);
    probe.units[3] = std::move(rid_len);
    probe.pairs = std::move(pairs);
    probe_stats(probe);
    w.fine.push_back(std::move(probe));
  } else {
    w.probe_order = group_by_workload(key_len, cfg.groups);
    auto head = make_phase("probe-head", PhaseKind::ProbeHead, {StepId::P1, StepId::P2}, pr.size());
    probe_stats(head);
    auto tail = make_phase("probe-tail", PhaseKind::ProbeTail, {StepId::P3, StepId::P4}, pr.size());
    tail.units[0].resize(pr.size());
    tail.units[1].resize(pr.size());
    tail.pairs.resize(pr.size());
    for (std::size_t j = 0; j < pr.size(); ++j) {
      const std::uint32_t i = w.probe_order[j];
      tail.units[0][j] = p3[i];
      tail.units[1][j] = rid_len[i];
      tail.pairs[j] = pairs[i];
    }
    probe_stats(tail);
    w.fine.push_back(std::move(head));
    w.fine.push_back(std::move(tail));
  }
  return w;
}

}  // namespace hjcp
