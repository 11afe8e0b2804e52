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
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjcp {

// SplitMix64. Each stream is a pure function of its seed; split() derives an
// independent child stream, so datasets reproduce across implementations.
class SplitMix64 {
 public:
  static constexpr const char* kAlgorithm = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by 128-bit multiply-shift; bound == 0 means 2^64.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return next();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  SplitMix64 split() { return SplitMix64(next() ^ 0x5851f42d4c957f2dULL); }

 private:
  std::uint64_t state_;
};

// Columnar two-attribute relation: 32-bit record ids and 32-bit keys.
struct Relation {
  std::vector<std::uint32_t> rids;
  std::vector<std::uint32_t> keys;

  std::size_t size() const { return keys.size(); }
  bool empty() const { return keys.empty(); }
  void reserve(std::size_t n) {
    rids.reserve(n);
    keys.reserve(n);
  }
  void push_back(std::uint32_t rid, std::uint32_t key) {
    rids.push_back(rid);
    keys.push_back(key);
  }
  bool operator==(const Relation&) const = default;
};

struct KeyRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0xffffffffULL;  // inclusive
  std::uint64_t width() const { return hi - lo + 1; }
};

enum class Distribution { Uniform, Skewed };

struct GenSpec {
  std::size_t n = 0;
  Distribution distribution = Distribution::Uniform;
  unsigned s_percent = 0;
  KeyRange key_range{};
  std::uint64_t seed = 1;
  std::optional<double> selectivity;
};

// Keys drawn independently and uniformly from `range`; rids = 0..n-1.
Relation gen_uniform(std::size_t n, KeyRange range, std::uint64_t seed);

// floor(n*s/100) tuples duplicate the key of a distinct partner tuple; every
// duplicated key appears exactly twice and all other keys are unique. Pairwise
// duplicates need s <= 50; larger values throw std::invalid_argument.
Relation gen_skewed(std::size_t n, unsigned s_percent, std::uint64_t seed);

// floor(n*selectivity) tuples take a key of a randomly chosen build tuple; the
// remainder take keys outside the build key set.
Relation gen_probe(const Relation& build, std::size_t n, double selectivity,
                   std::uint64_t seed);

Relation generate(const GenSpec& spec);

class RelationIoError : public std::runtime_error {
 public:
  enum class Kind { Io, MalformedHeader, LengthMismatch };
  RelationIoError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Little-endian: "HJRL", u32 version = 1, u64 len, len x u32 rids, len x u32 keys.
inline constexpr std::uint32_t kRelationFormatVersion = 1;
inline constexpr std::size_t kRelationHeaderBytes = 16;

void write_bin(const std::filesystem::path& path, const Relation& rel);
Relation read_bin(const std::filesystem::path& path);

}  // namespace hjcp
