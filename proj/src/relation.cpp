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

#include "hjcp/relation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace hjcp {
namespace {

// Bijective 32-bit finaliser; distinct inputs give distinct keys.
std::uint32_t fmix32(std::uint32_t h) {
  h ^= h >> 16;
  h *= 0x85ebca6bU;
  h ^= h >> 13;
  h *= 0xc2b2ae35U;
  h ^= h >> 16;
  return h;
}

template <class T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<std::uint32_t> iota_rids(std::size_t n) {
  std::vector<std::uint32_t> rids(n);
  std::iota(rids.begin(), rids.end(), 0U);
  return rids;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap32(v);
  }
  return v;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap64(v);
  }
  return v;
}

}  // namespace

Relation gen_uniform(std::size_t n, KeyRange range, std::uint64_t seed) {
  if (range.hi < range.lo || range.hi > 0xffffffffULL) {
    throw std::invalid_argument("gen_uniform: key range must be a non-empty 32-bit interval");
  }
  SplitMix64 rng(seed);
  Relation rel;
  rel.rids = iota_rids(n);
  rel.keys.resize(n);
  const std::uint64_t width = range.width();
  for (auto& k : rel.keys) {
    k = static_cast<std::uint32_t>(range.lo + rng.below(width));
  }
  return rel;
}

Relation gen_skewed(std::size_t n, unsigned s_percent, std::uint64_t seed) {
  if (s_percent > 100) {
    throw std::invalid_argument("gen_skewed: s_percent must be in [0, 100]");
  }
  const std::size_t dups = static_cast<std::size_t>(
      (static_cast<unsigned __int128>(n) * s_percent) / 100);
  const std::size_t uniques = n - dups;
  if (dups > uniques) {
    throw std::invalid_argument(
        "gen_skewed: more than 50% duplicates cannot pair each with a distinct partner");
  }
  SplitMix64 rng(seed);
  const auto salt = static_cast<std::uint32_t>(rng.next());

  Relation rel;
  rel.rids = iota_rids(n);
  rel.keys.resize(n);
  for (std::size_t j = 0; j < uniques; ++j) {
    rel.keys[j] = fmix32(static_cast<std::uint32_t>(j) ^ salt);
  }
  // Partial Fisher-Yates picks `dups` distinct partners among the uniques.
  std::vector<std::uint32_t> pool(uniques);
  std::iota(pool.begin(), pool.end(), 0U);
  for (std::size_t d = 0; d < dups; ++d) {
    std::size_t j = d + rng.below(uniques - d);
    std::swap(pool[d], pool[j]);
    rel.keys[uniques + d] = rel.keys[pool[d]];
  }
  shuffle(rel.keys, rng);
  return rel;
}

Relation gen_probe(const Relation& build, std::size_t n, double selectivity,
                   std::uint64_t seed) {
  if (!(selectivity >= 0.0 && selectivity <= 1.0)) {
    throw std::invalid_argument("gen_probe: selectivity must be in [0, 1]");
  }
  if (selectivity > 0.0 && build.empty()) {
    throw std::invalid_argument("gen_probe: selectivity > 0 requires a non-empty build relation");
  }
  const auto hits = static_cast<std::size_t>(
      std::floor(static_cast<long double>(n) * static_cast<long double>(selectivity)));

  std::vector<std::uint32_t> present(build.keys);
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  // present[i] - i is non-decreasing, so the t-th absent value is
  // t + #{i : present[i] - i <= t}.
  std::vector<std::uint64_t> shifted(present.size());
  for (std::size_t i = 0; i < present.size(); ++i) shifted[i] = present[i] - i;
  const std::uint64_t absent = (1ULL << 32) - present.size();

  SplitMix64 rng(seed);
  Relation rel;
  rel.rids = iota_rids(n);
  rel.keys.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j < hits) {
      rel.keys[j] = build.keys[rng.below(build.size())];
    } else {
      const std::uint64_t t = rng.below(absent);
      const auto below = static_cast<std::uint64_t>(
          std::upper_bound(shifted.begin(), shifted.end(), t) - shifted.begin());
      rel.keys[j] = static_cast<std::uint32_t>(t + below);
    }
  }
  shuffle(rel.keys, rng);
  return rel;
}

Relation generate(const GenSpec& spec) {
  if (spec.distribution == Distribution::Skewed) {
    return gen_skewed(spec.n, spec.s_percent, spec.seed);
  }
  return gen_uniform(spec.n, spec.key_range, spec.seed);
}

void write_bin(const std::filesystem::path& path, const Relation& rel) {
  if (rel.rids.size() != rel.keys.size()) {
    throw RelationIoError(RelationIoError::Kind::LengthMismatch,
                          "write_bin: rid and key columns differ in length");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RelationIoError(RelationIoError::Kind::Io, "cannot open " + path.string() + " for writing");
  }
  const char magic[4] = {'H', 'J', 'R', 'L'};
  const std::uint32_t version = to_le(kRelationFormatVersion);
  const std::uint64_t len = to_le(static_cast<std::uint64_t>(rel.size()));
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&len), 8);
  auto write_column = [&](const std::vector<std::uint32_t>& col) {
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(col.data()),
                static_cast<std::streamsize>(col.size() * sizeof(std::uint32_t)));
    } else {
      for (auto v : col) {
        auto le = to_le(v);
        out.write(reinterpret_cast<const char*>(&le), 4);
      }
    }
  };
  write_column(rel.rids);
  write_column(rel.keys);
  if (!out) {
    throw RelationIoError(RelationIoError::Kind::Io, "write failed for " + path.string());
  }
}

Relation read_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RelationIoError(RelationIoError::Kind::Io, "cannot open " + path.string());
  }
  char header[kRelationHeaderBytes];
  if (!in.read(header, kRelationHeaderBytes)) {
    throw RelationIoError(RelationIoError::Kind::MalformedHeader, "truncated header in " + path.string());
  }
  if (std::memcmp(header, "HJRL", 4) != 0) {
    throw RelationIoError(RelationIoError::Kind::MalformedHeader, "bad magic in " + path.string());
  }
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&len, header + 8, 8);
  version = to_le(version);
  len = to_le(len);
  if (version != kRelationFormatVersion) {
    throw RelationIoError(RelationIoError::Kind::MalformedHeader,
                          "unsupported version " + std::to_string(version));
  }
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected = kRelationHeaderBytes + 8 * len;
  if (len > (file_size / 8) || file_size != expected) {
    throw RelationIoError(RelationIoError::Kind::LengthMismatch,
                          "file size " + std::to_string(file_size) + " does not match len " +
                              std::to_string(len));
  }
  in.seekg(kRelationHeaderBytes);
  Relation rel;
  rel.rids.resize(len);
  rel.keys.resize(len);
  in.read(reinterpret_cast<char*>(rel.rids.data()), static_cast<std::streamsize>(len * 4));
  in.read(reinterpret_cast<char*>(rel.keys.data()), static_cast<std::streamsize>(len * 4));
  if (!in) {
    throw RelationIoError(RelationIoError::Kind::Io, "read failed for " + path.string());
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : rel.rids) v = to_le(v);
    for (auto& v : rel.keys) v = to_le(v);
  }
  return rel;
}

}  // namespace hjcp
