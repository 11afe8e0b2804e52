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

#include <cstdint>

namespace hjcp {

inline constexpr std::uint32_t kDefaultHashSeed = 0x9747b28cU;

// MurmurHash2 of a single 4-byte little-endian word.
constexpr std::uint32_t murmur2(std::uint32_t key, std::uint32_t seed) {
  constexpr std::uint32_t m = 0x5bd1e995U;
  constexpr int r = 24;
  std::uint32_t h = seed ^ 4U;
  std::uint32_t k = key;
  k *= m;
  k ^= k >> r;
  k *= m;
  h *= m;
  h ^= k;
  h ^= h >> 13;
  h *= m;
  h ^= h >> 15;
  return h;
}

}  // namespace hjcp
