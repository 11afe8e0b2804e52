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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "hjcp/relation.hpp"

using namespace hjcp;

namespace {

// Reference SplitMix64 written out from the published constants.
std::uint64_t ref_splitmix(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::filesystem::path tmp_file(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("hjcp_test_") + name);
}

}  // namespace

TEST_CASE("splitmix64 matches the reference stream") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xe220a8397b1dcdafULL);
  for (std::uint64_t seed : {1ULL, 42ULL, 0xdeadbeefULL}) {
    SplitMix64 a(seed);
    std::uint64_t x = seed;
    for (int i = 0; i < 100; ++i) CHECK(a.next() == ref_splitmix(x));
  }
}

TEST_CASE("below stays in range and covers small domains") {
  SplitMix64 g(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = g.below(10);
    REQUIRE(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
  for (int i = 0; i < 1000; ++i) {
    const double u = g.unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform generation respects the key range and is deterministic") {
  const KeyRange range{100, 199};
  const Relation a = gen_uniform(5000, range, 3);
  const Relation b = gen_uniform(5000, range, 3);
  CHECK(a == b);
  CHECK(a.size() == 5000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.rids[i] == i);
    REQUIRE(a.keys[i] >= 100);
    REQUIRE(a.keys[i] <= 199);
  }
  CHECK(gen_uniform(5000, range, 4) != a);
  // Full-range keys stay mostly distinct.
  const Relation wide = gen_uniform(1 << 14, KeyRange{}, 9);
  std::unordered_set<std::uint32_t> distinct(wide.keys.begin(), wide.keys.end());
  CHECK(distinct.size() > (1 << 14) - 10);
}

TEST_CASE("skewed generation duplicates exactly floor(n*s/100) tuples in pairs") {
  for (unsigned s : {0U, 10U, 25U, 50U}) {
    for (std::size_t n : {std::size_t{1000}, std::size_t{4097}}) {
      const Relation r = gen_skewed(n, s, 11 + s);
      REQUIRE(r.size() == n);
      std::unordered_map<std::uint32_t, int> count;
      for (auto k : r.keys) ++count[k];
      std::size_t twice = 0;
      for (const auto& [k, c] : count) {
        REQUIRE(c <= 2);
        twice += c == 2;
      }
      CHECK(twice == n * s / 100);
    }
  }
  CHECK_THROWS_AS(gen_skewed(100, 51, 1), std::invalid_argument);
}

TEST_CASE("probe generation hits the build set with the requested selectivity") {
  const Relation build = gen_skewed(4096, 25, 5);
  const std::unordered_set<std::uint32_t> keys(build.keys.begin(), build.keys.end());
  for (double sel : {0.0, 0.125, 0.5, 1.0}) {
    const Relation probe = gen_probe(build, 3000, sel, 17);
    REQUIRE(probe.size() == 3000);
    std::size_t hits = 0;
    for (auto k : probe.keys) hits += keys.count(k);
    CHECK(hits == static_cast<std::size_t>(3000 * sel));
  }
}

TEST_CASE("binary relation files round-trip") {
  const auto path = tmp_file("roundtrip.bin");
  const Relation r = gen_uniform(1234, KeyRange{}, 21);
  write_bin(path, r);
  CHECK(std::filesystem::file_size(path) == kRelationHeaderBytes + 8 * r.size());
  CHECK(read_bin(path) == r);
  write_bin(path, Relation{});
  CHECK(read_bin(path).empty());
  std::filesystem::remove(path);
}

TEST_CASE("binary file layout is little-endian with a HJRL header") {
  const auto path = tmp_file("layout.bin");
  Relation r;
  r.push_back(0x01020304, 0xa0b0c0d0);
  write_bin(path, r);
  std::ifstream f(path, std::ios::binary);
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  REQUIRE(b.size() == 24);
  CHECK(std::string(b.begin(), b.begin() + 4) == "HJRL");
  CHECK(b[4] == 1);
  CHECK(b[8] == 1);
  CHECK(b[16] == 0x04);
  CHECK(b[19] == 0x01);
  CHECK(b[20] == 0xd0);
  CHECK(b[23] == 0xa0);
  std::filesystem::remove(path);
}

TEST_CASE("relation file errors are classified") {
  auto kind_of = [](const std::filesystem::path& p) {
    try {
      (void)read_bin(p);
    } catch (const RelationIoError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  CHECK(kind_of(tmp_file("does_not_exist.bin")) == static_cast<int>(RelationIoError::Kind::Io));

  const auto bad = tmp_file("bad.bin");
  {
    std::ofstream f(bad, std::ios::binary);
    f << "NOPE0000000000000000";
  }
  CHECK(kind_of(bad) == static_cast<int>(RelationIoError::Kind::MalformedHeader));

  const Relation r = gen_uniform(10, KeyRange{}, 1);
  write_bin(bad, r);
  std::filesystem::resize_file(bad, std::filesystem::file_size(bad) - 4);
  CHECK(kind_of(bad) == static_cast<int>(RelationIoError::Kind::LengthMismatch));

  Relation uneven = r;
  uneven.rids.pop_back();
  CHECK_THROWS_AS(write_bin(bad, uneven), RelationIoError);
  std::filesystem::remove(bad);
}
