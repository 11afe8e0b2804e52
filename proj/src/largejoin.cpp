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

#include "hjcp/largejoin.hpp"

#include <omp.h>

#include <algorithm>
#include <map>

#include "hjcp/engine.hpp"
#include "hjcp/partition.hpp"

namespace hjcp {

namespace {

// Pair tables hash with cfg.seed; reusing it here would leave every key of a
// pair with the same low hash bits.
std::uint32_t external_seed(const EngineConfig& cfg) { return cfg.seed ^ 0x9e3779b9U; }

int table_workers() { return 2 * omp_get_max_threads() + 1; }

std::size_t chunk_footprint(std::size_t items, unsigned bits, std::size_t block_size) {
  return items * 8 + partition_arena_bytes(items, std::size_t{1} << bits, PartitionPassCtx{}.block_bytes,
                                           block_size, omp_get_max_threads());
}

struct Fragment {
  std::size_t chunk;
  Relation tuples;
};

// Per-partition fragment lists of one relation.
struct Spill {
  std::vector<std::vector<std::size_t>> links;  // partition -> fragment ids
  std::vector<Fragment> fragments;
  std::size_t bytes = 0;

  Relation gather(std::size_t p) const {
    Relation out;
    for (std::size_t f : links[p]) {
      const auto& t = fragments[f].tuples;
      out.rids.insert(out.rids.end(), t.rids.begin(), t.rids.end());
      out.keys.insert(out.keys.end(), t.keys.begin(), t.keys.end());
    }
    return out;
  }
};

class PartitionClock {
 public:
  PartitionClock(const ProfileSet& truth, const EngineConfig& cfg, const SearchOptions& opt)
      : truth_(truth), cfg_(cfg), opt_(opt) {}

  double pass_time(std::size_t x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    const PhaseData ph = partition_phase(x, 0);
    const PhaseModel m = calibrate_phase(ph, truth_, cfg_.arch, cfg_.effective_table_mode());
    const PhaseChoice c = search_pl(m, opt_);
    const PhaseSimulator sim(ph, truth_, {cfg_.arch, cfg_.effective_table_mode(), cfg_.block_size, 0});
    const double t = sim.run_static(c.r).total();
    cache_.emplace(x, t);
    return t;
  }

 private:
  ProfileSet truth_;
  EngineConfig cfg_;
  SearchOptions opt_;
  std::map<std::size_t, double> cache_;
};

Spill spill(const Relation& rel, unsigned bits, unsigned passes, std::size_t chunk,
            const EngineConfig& cfg, PartitionClock& clock, LargeJoinReport& rep) {
  Spill out;
  out.links.resize(std::size_t{1} << bits);
  const unsigned per_pass = (bits + passes - 1) / passes;
  for (std::size_t a = 0; a < rel.size(); a += chunk) {
    const std::size_t b = std::min(rel.size(), a + chunk);
    Relation in;
    in.rids.assign(rel.rids.begin() + static_cast<std::ptrdiff_t>(a), rel.rids.begin() + static_cast<std::ptrdiff_t>(b));
    in.keys.assign(rel.keys.begin() + static_cast<std::ptrdiff_t>(a), rel.keys.begin() + static_cast<std::ptrdiff_t>(b));
    // The top pass may carry fewer bits; low hash bits are identical either way.
    PartitionSet ps = radix_partition(in, per_pass, passes, external_seed(cfg), cfg.block_size);
    const std::size_t fan = std::size_t{1} << bits;
    for (unsigned p = 0; p < passes; ++p) rep.partition_time += clock.pass_time(in.size());
    for (std::size_t q = 0; q < ps.partitions(); ++q) {
      if (ps.size(q) == 0) continue;
      Fragment f{rep.chunks, {}};
      f.tuples.rids.assign(ps.rids(q).begin(), ps.rids(q).end());
      f.tuples.keys.assign(ps.keys(q).begin(), ps.keys(q).end());
      out.bytes += f.tuples.size() * 8;
      out.links[q & (fan - 1)].push_back(out.fragments.size());
      out.fragments.push_back(std::move(f));
    }
    ++rep.chunks;
  }
  return out;
}

}  // namespace

std::size_t join_footprint(std::size_t r_size, std::size_t s_size, std::size_t block_size) {
  return (r_size + s_size) * 8 + table_arena_bytes(r_size + 1, block_size, table_workers());
}

LargeJoinReport large_join(const Relation& r, const Relation& s, const ProfileSet& truth,
                           const LargeJoinOptions& opt) {
  LargeJoinReport rep;
  const EngineConfig& cfg = opt.pair_cfg;
  const std::size_t bs = cfg.block_size;

  auto join_pair = [&](const Relation& rp, const Relation& sp) {
    if (join_footprint(rp.size(), sp.size(), bs) > opt.buffer_bytes) {
      throw BufferOverflow("partition pair exceeds the buffer");
    }
    if (rp.empty() || sp.empty()) return;
    const Engine eng(rp, sp, cfg, truth);
    const auto report = eng.execute(eng.plan(opt.scheme, opt.search));
    rep.join_time += report.total();
    rep.result.insert(rep.result.end(), report.result.begin(), report.result.end());
    ++rep.pairs;
  };

  if (join_footprint(r.size(), s.size(), bs) <= opt.buffer_bytes) {
    rep.in_buffer = true;
    join_pair(r, s);
    return rep;
  }

  const unsigned max_bits = opt.pass_bits * opt.max_passes;
  const double need = static_cast<double>(join_footprint(r.size(), s.size(), bs)) /
                      static_cast<double>(opt.buffer_bytes);
  unsigned bits = 1;
  while (bits < max_bits && static_cast<double>(1ULL << bits) < 2.0 * need) ++bits;

  PartitionClock clock(truth, cfg, opt.search);
  for (;; ++bits) {
    if (bits > max_bits) {
      throw BufferOverflow("a partition pair still exceeds the buffer after " +
                           std::to_string(opt.max_passes) + " passes; allow more passes");
    }
    const unsigned passes = (bits + opt.pass_bits - 1) / opt.pass_bits;
    const unsigned per_pass = (bits + passes - 1) / passes;
    std::size_t chunk = std::min(opt.chunk_tuples, std::max(r.size(), s.size()));
    while (chunk > 64 && chunk_footprint(chunk, per_pass * passes, bs) > opt.buffer_bytes) chunk /= 2;
    if (chunk_footprint(chunk, per_pass * passes, bs) > opt.buffer_bytes) {
      throw BufferOverflow("buffer too small to partition even a tiny chunk");
    }

    LargeJoinReport trial;
    trial.bits = bits;
    trial.passes = passes;
    trial.chunk_tuples = chunk;
    const Spill rs = spill(r, bits, passes, chunk, cfg, clock, trial);
    const Spill ss = spill(s, bits, passes, chunk, cfg, clock, trial);
    bool fits = true;
    std::vector<std::size_t> rn(rs.links.size(), 0), sn(rs.links.size(), 0);
    for (std::size_t p = 0; p < rs.links.size(); ++p) {
      for (std::size_t f : rs.links[p]) rn[p] += rs.fragments[f].tuples.size();
      for (std::size_t f : ss.links[p]) sn[p] += ss.fragments[f].tuples.size();
      fits = fits && join_footprint(rn[p], sn[p], bs) <= opt.buffer_bytes;
    }
    if (!fits) continue;

    rep = std::move(trial);
    rep.spilled_bytes = rs.bytes + ss.bytes;
    // Chunks in, partitions out, pairs back in.
    const double moved = static_cast<double>((r.size() + s.size()) * 8) * 2.0 +
                         static_cast<double>(rep.spilled_bytes);
    rep.copy_time = moved / truth.system.copy_bandwidth;
    for (std::size_t p = 0; p < rs.links.size(); ++p) join_pair(rs.gather(p), ss.gather(p));
    return rep;
  }
}

}  // namespace hjcp
