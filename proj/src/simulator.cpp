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

#include "hjcp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hjcp {

std::size_t granule_for(const ProfileSet& truth) {
  const std::size_t g = std::lcm(std::lcm(std::size_t{64}, std::size_t{truth.cpu.wavefront_width}),
                                 std::size_t{truth.gpu.wavefront_width});
  if (g > 4096) throw std::invalid_argument("wavefront widths give a granule above 4096 items");
  return g;
}

std::size_t default_chunk(std::size_t x, std::size_t granule) {
  const std::size_t want = (x / 256 + granule - 1) / granule * granule;
  const std::size_t cap = std::max<std::size_t>(granule, 65536 / granule * granule);
  return std::clamp(want, granule, cap);
}

std::size_t split_point(double r, std::size_t x, std::size_t granule) {
  if (r >= 1.0) return x;
  if (r <= 0.0) return 0;
  const double g = std::round(r * static_cast<double>(x) / static_cast<double>(granule));
  return std::min(x, static_cast<std::size_t>(g) * granule);
}

namespace {

double lock_bytes(const PhaseData& ph, std::size_t pos, std::size_t item) {
  const StepId s = ph.series.steps[pos];
  if (s == StepId::B3) return ph.new_key.empty() ? 0.0 : 16.0 * ph.new_key[item];
  return static_cast<double>(alloc_bytes(s));
}

}  // namespace

PhaseSimulator::PhaseSimulator(const PhaseData& ph, const ProfileSet& truth, const SimOptions& opt)
    : ph_(&ph), truth_(truth), opt_(opt) {
  granule_ = granule_for(truth);
  chunk_ = opt.chunk_items ? (opt.chunk_items + granule_ - 1) / granule_ * granule_
                           : default_chunk(ph.x(), granule_);
  const std::size_t x = ph.x();
  const std::size_t n = ph.nsteps();
  nblocks_ = (x + granule_ - 1) / granule_;
  const bool coarse = ph.series.kind == PhaseKind::Coarse;

  for (int d = 0; d < 2; ++d) {
    const DeviceProfile& dp = d == kCpu ? truth_.cpu : truth_.gpu;
    const std::size_t w = dp.wavefront_width;
    const double lock_unit = dp.atomic_cost / static_cast<double>(opt.block_size);
    cost_prefix_[d].assign(n, std::vector<double>(nblocks_ + 1, 0.0));
    mem_prefix_[d].assign(n, std::vector<double>(nblocks_ + 1, 0.0));
    lock_prefix_[d].assign(n, std::vector<double>(nblocks_ + 1, 0.0));
    std::vector<double> item_cost, item_mem;
    if (coarse) {
      item_cost.resize(x);
      item_mem.resize(x);
      for (std::size_t j = 0; j < x; ++j) item_cost[j] = coarse_item_cost(dp, ph.coarse_units[j], &item_mem[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const StepId s = ph.series.steps[i];
      const double k = coarse ? 0.0 : dp.cost_per_unit(s);
      const double km = coarse ? 0.0 : dp.mem(s);
      auto& cp = cost_prefix_[d][i];
      auto& mp = mem_prefix_[d][i];
      auto& lp = lock_prefix_[d][i];
      for (std::size_t blk = 0; blk < nblocks_; ++blk) {
        const std::size_t a = blk * granule_, b = std::min(x, a + granule_);
        double c = 0.0, m = 0.0, l = 0.0;
        for (std::size_t wa = a; wa < b; wa += w) {
          const std::size_t wb = std::min(b, wa + w);
          double mx = 0.0, mxm = 0.0;
          for (std::size_t j = wa; j < wb; ++j) {
            double cj, mj;
            if (coarse) {
              cj = item_cost[j];
              mj = item_mem[j];
              const auto& cu = ph.coarse_units[j];
              l += lock_unit * cu[index(StepId::B4)] * (8.0 + 16.0 * ph.stats.new_key_fraction);
            } else {
              const double u = ph.unit(i, j);
              cj = k * u;
              mj = km * u;
              l += lock_unit * lock_bytes(ph, i, j);
            }
            if (cj > mx) {
              mx = cj;
              mxm = mj;
            }
          }
          c += static_cast<double>(w) * mx;
          m += static_cast<double>(w) * mxm;
        }
        cp[blk + 1] = cp[blk] + c + l;
        mp[blk + 1] = mp[blk] + m;
        lp[blk + 1] = lp[blk] + l;
      }
    }
  }

  if (ph.series.kind == PhaseKind::Build) {
    merge_prefix_.assign(nblocks_ + 1, 0.0);
    const DeviceProfile& c = truth_.cpu;
    const double fixed = c.cost_per_unit(StepId::B2) + c.cost_per_unit(StepId::B4);
    const double per = c.cost_per_unit(StepId::B3);
    for (std::size_t blk = 0; blk < nblocks_; ++blk) {
      double acc = 0.0;
      for (std::size_t j = blk * granule_; j < std::min(x, (blk + 1) * granule_); ++j) acc += fixed + per * ph.unit(2, j);
      merge_prefix_[blk + 1] = merge_prefix_[blk] + acc;
    }
  }
  if (!ph.pairs.empty()) {
    pairs_prefix_.assign(nblocks_ + 1, 0.0);
    for (std::size_t blk = 0; blk < nblocks_; ++blk) {
      double acc = 0.0;
      for (std::size_t j = blk * granule_; j < std::min(x, (blk + 1) * granule_); ++j) acc += ph.pairs[j];
      pairs_prefix_[blk + 1] = pairs_prefix_[blk] + acc;
    }
  }
  if (coarse) {
    tuples_prefix_.assign(nblocks_ + 1, 0.0);
    for (std::size_t blk = 0; blk < nblocks_; ++blk) {
      double acc = 0.0;
      for (std::size_t j = blk * granule_; j < std::min(x, (blk + 1) * granule_); ++j) {
        acc += ph.coarse_units[j][index(StepId::B1)] + ph.coarse_units[j][index(StepId::P1)];
      }
      tuples_prefix_[blk + 1] = tuples_prefix_[blk] + acc;
    }
  }
}

double PhaseSimulator::cost(int d, std::size_t i, std::size_t a, std::size_t b, double* mem) const {
  if (b <= a) {
    if (mem) *mem = 0.0;
    return 0.0;
  }
  const std::size_t ka = a / granule_;
  const std::size_t kb = (b + granule_ - 1) / granule_;
  if (mem) *mem = mem_prefix_[d][i][kb] - mem_prefix_[d][i][ka];
  return cost_prefix_[d][i][kb] - cost_prefix_[d][i][ka];
}

double PhaseSimulator::merge_cost(std::size_t a, std::size_t b) const {
  if (merge_prefix_.empty() || b <= a) return 0.0;
  return merge_prefix_[(b + granule_ - 1) / granule_] - merge_prefix_[a / granule_];
}

double PhaseSimulator::pairs(std::size_t a, std::size_t b) const {
  if (pairs_prefix_.empty() || b <= a) return 0.0;
  return pairs_prefix_[(b + granule_ - 1) / granule_] - pairs_prefix_[a / granule_];
}

PhaseTiming PhaseSimulator::run_static(std::span<const double> r) const {
  const std::size_t n = ph_->nsteps();
  if (r.size() != n) throw std::invalid_argument("ratio vector does not match the step series");
  std::vector<std::size_t> splits(n);
  for (std::size_t i = 0; i < n; ++i) splits[i] = split_point(r[i], ph_->x(), granule_);
  std::array<std::vector<Task>, 2> tasks;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo[2] = {0, splits[i]};
    const std::size_t hi[2] = {splits[i], ph_->x()};
    for (int d = 0; d < 2; ++d) {
      for (std::size_t a = lo[d]; a < hi[d];) {
        const std::size_t b = std::min(hi[d], (a / chunk_ + 1) * chunk_);
        tasks[d].push_back({static_cast<int>(i), a, b});
        a = b;
      }
    }
  }
  return run(&tasks, 0, splits);
}

PhaseTiming PhaseSimulator::run_dynamic(std::size_t chunk_items) const {
  if (chunk_items == 0) throw std::invalid_argument("chunk size must be >= 1");
  const std::size_t c = (chunk_items + granule_ - 1) / granule_ * granule_;
  return run(nullptr, c, {});
}

PhaseTiming PhaseSimulator::run(std::array<std::vector<Task>, 2>* fixed, std::size_t dyn_chunk,
                                std::span<const std::size_t> splits) const {
  const PhaseData& ph = *ph_;
  const std::size_t n = ph.nsteps();
  const std::size_t x = ph.x();
  const bool discrete = opt_.arch == Arch::Discrete;
  const double kappa = discrete ? 0.0 : truth_.system.contention;
  TransferLink link = truth_.system.link;
  link.enabled = discrete;
  const std::size_t ncells = (x + granule_ - 1) / granule_;

  PhaseTiming pt;
  pt.name = ph.series.name;
  pt.chunk_items = fixed ? chunk_ : dyn_chunk;
  for (auto& d : pt.dev) d.step_busy.assign(n, 0.0);

  // Realized GPU share, used for link traffic before and after the phase.
  GpuShare share;
  double gpu_prologue = 0.0;
  if (fixed) {
    for (std::size_t i = 0; i < n; ++i) share.items[i] = static_cast<double>(x - splits[i]);
    share.pairs = pairs(splits[n - 1], x);
    if (!tuples_prefix_.empty()) {
      share.tuples = tuples_prefix_[nblocks_] - tuples_prefix_[splits[0] / granule_];
    }
    gpu_prologue = phase_overheads(ph, share, truth_.system, opt_.arch).gpu_prologue;
  } else if (discrete) {
    // Only the table goes up front; chunk inputs travel with each chunk.
    const auto& st = ph.stats;
    double bytes = 0.0;
    for (StepId s : ph.series.steps) {
      if (s == StepId::P2) bytes += st.header_bytes;
    }
    for (StepId s : ph.series.steps) {
      if (s == StepId::P3 || s == StepId::P4) {
        bytes += st.node_bytes;
        break;
      }
    }
    if (bytes > 0) gpu_prologue = transfer_time(link, bytes);
  }

  std::vector<std::vector<double>> done;
  if (fixed) done.assign(n, std::vector<double>(ncells, -1.0));
  std::size_t next_chunk = 0;
  const std::size_t nchunks = fixed ? 0 : (x + dyn_chunk - 1) / dyn_chunk;
  if (!fixed) pt.chunk_owner.assign(nchunks, 0);

  struct State {
    std::size_t next = 0;
    bool finished = false;
    int kind = 0;  // 0 idle, 1 transfer, 2 compute
    double rem = 0.0;
    double comp = 0.0;
    double mf = 0.0;
    double lock = 0.0;
    Task cur;
    double idle_since = 0.0;
    double last_done = 0.0;
    bool prologue_done = false;
    std::vector<double> frac;
  };
  std::array<State, 2> st;
  double now = 0.0;

  auto owner_range = [&](int d, std::size_t step) {
    return d == kCpu ? std::pair{std::size_t{0}, splits[step]} : std::pair{splits[step], x};
  };

  auto complete = [&](int d) {
    State& s = st[d];
    if (fixed && s.cur.step >= 0) {
      auto& dn = done[static_cast<std::size_t>(s.cur.step)];
      for (std::size_t c = s.cur.a / granule_; c < (s.cur.b + granule_ - 1) / granule_; ++c) dn[c] = now;
    }
    pt.dev[d].items += (s.cur.b - s.cur.a) * (s.cur.step >= 0 ? 1 : n);
    pt.dev[d].lock += s.lock;
    s.kind = 0;
    ++s.next;
    s.idle_since = now;
    s.last_done = now;
  };

  auto try_start = [&](int d) {
    State& s = st[d];
    while (s.kind == 0 && !s.finished) {
      Task t;
      if (fixed) {
        const auto& list = (*fixed)[d];
        if (s.next >= list.size()) {
          s.finished = true;
          break;
        }
        t = list[s.next];
        if (t.step > 0) {
          const auto& dn = done[static_cast<std::size_t>(t.step - 1)];
          bool ready = true;
          for (std::size_t c = t.a / granule_; c < (t.b + granule_ - 1) / granule_; ++c) {
            if (dn[c] < 0.0) {
              ready = false;
              break;
            }
          }
          if (!ready) break;
        }
      } else {
        if (next_chunk >= nchunks) {
          s.finished = true;
          break;
        }
        const std::size_t k = next_chunk++;
        pt.chunk_owner[k] = static_cast<std::uint8_t>(d);
        t = Task{-1, k * dyn_chunk, std::min(x, (k + 1) * dyn_chunk)};
      }
      pt.dev[d].stall += now - s.idle_since;
      s.cur = t;
      double xfer = 0.0;
      if (d == kGpu && !s.prologue_done) {
        xfer += gpu_prologue;
        s.prologue_done = true;
      }
      if (discrete) {
        if (fixed && t.step > 0) {
          const auto [lo, hi] = owner_range(1 - d, static_cast<std::size_t>(t.step - 1));
          const std::size_t a = std::max(lo, t.a), b = std::min(hi, t.b);
          if (b > a) xfer += transfer_time(link, static_cast<double>(b - a) * kIntermediateBytes);
        } else if (!fixed && d == kGpu) {
          double in_items = static_cast<double>(t.b - t.a);
          if (!tuples_prefix_.empty()) {
            in_items = tuples_prefix_[(t.b + granule_ - 1) / granule_] - tuples_prefix_[t.a / granule_];
          }
          xfer += transfer_time(link, in_items * kIntermediateBytes);
        }
      }
      double comp = 0.0, mem = 0.0, lock = 0.0;
      s.frac.assign(n, 0.0);
      if (t.step >= 0) {
        const auto i = static_cast<std::size_t>(t.step);
        comp = cost(d, i, t.a, t.b, &mem);
        lock = lock_prefix_[d][i][(t.b + granule_ - 1) / granule_] - lock_prefix_[d][i][t.a / granule_];
        s.frac[i] = 1.0;
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          double m = 0.0;
          const double c = cost(d, i, t.a, t.b, &m);
          s.frac[i] = c;
          comp += c;
          mem += m;
          lock += lock_prefix_[d][i][(t.b + granule_ - 1) / granule_] - lock_prefix_[d][i][t.a / granule_];
        }
        const double dispatch = truth_.system.dispatch_cost;
        if (comp > 0) {
          for (auto& f : s.frac) f /= comp;
        } else {
          s.frac[0] = 1.0;
        }
        comp += dispatch;
      }
      s.comp = comp;
      s.lock = lock;
      s.mf = comp > 0 ? mem / comp : 0.0;
      if (xfer > 0) {
        s.kind = 1;
        s.rem = xfer;
      } else if (comp > 0) {
        s.kind = 2;
        s.rem = comp;
      } else {
        complete(d);
      }
    }
  };

  while (true) {
    try_start(kCpu);
    try_start(kGpu);
    // A completion by the GPU may unblock the CPU within the same instant.
    try_start(kCpu);
    const bool run0 = st[0].kind != 0, run1 = st[1].kind != 0;
    if (!run0 && !run1) {
      if (st[0].finished && st[1].finished) break;
      throw std::logic_error("simulator: both devices blocked");
    }
    std::array<double, 2> rate{1.0, 1.0};
    for (int d = 0; d < 2; ++d) {
      if (st[d].kind == 2 && st[1 - d].kind == 2) rate[d] = 1.0 / (1.0 + kappa * st[d].mf);
    }
    double dt = std::numeric_limits<double>::infinity();
    int first = -1;
    for (int d = 0; d < 2; ++d) {
      if (st[d].kind != 0 && st[d].rem / rate[d] < dt) {
        dt = st[d].rem / rate[d];
        first = d;
      }
    }
    for (int d = 0; d < 2; ++d) {
      State& s = st[d];
      if (s.kind == 0) continue;
      if (s.kind == 1) {
        pt.dev[d].transfer += dt;
      } else {
        for (std::size_t i = 0; i < n; ++i) pt.dev[d].step_busy[i] += dt * s.frac[i];
      }
      s.rem = d == first ? 0.0 : s.rem - dt * rate[d];
    }
    now += dt;
    for (int d = 0; d < 2; ++d) {
      State& s = st[d];
      if (s.kind == 0 || s.rem > 1e-12 * std::max(1e-9, s.comp)) continue;
      if (s.kind == 1 && s.comp > 0) {
        s.kind = 2;
        s.rem = s.comp;
      } else {
        complete(d);
      }
    }
  }
  for (int d = 0; d < 2; ++d) pt.dev[d].end = st[d].last_done;

  const bool separate = opt_.table_mode == TableMode::Separate || discrete;
  if (fixed) {
    if (ph.series.kind == PhaseKind::Build && separate) pt.merge = merge_cost(splits[2], x);
    const auto ov = phase_overheads(ph, share, truth_.system, opt_.arch);
    pt.post_transfer = ov.post_transfer;
    pt.regroup = ov.regroup;
  } else {
    GpuShare g;
    for (std::size_t k = 0; k < nchunks; ++k) {
      if (pt.chunk_owner[k] != kGpu) continue;
      const std::size_t a = k * dyn_chunk, b = std::min(x, (k + 1) * dyn_chunk);
      if (ph.series.kind == PhaseKind::Build && separate) pt.merge += merge_cost(a, b);
      for (std::size_t i = 0; i < n; ++i) g.items[i] += static_cast<double>(b - a);
      g.pairs += pairs(a, b);
    }
    auto ov = phase_overheads(ph, g, truth_.system, opt_.arch);
    pt.regroup = ov.regroup;
    if (discrete) {
      // Inputs and tables were already charged per chunk; only the way back remains.
      pt.post_transfer = ov.post_transfer;
      if (ph.series.kind == PhaseKind::Partition && g.items[2] > 0) {
        pt.post_transfer = transfer_time(link, g.items[2] * kIntermediateBytes);
      }
    }
  }
  return pt;
}

}  // namespace hjcp
