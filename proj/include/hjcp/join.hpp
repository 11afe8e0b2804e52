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

#include "hjcp/kernels.hpp"
#include "hjcp/relation.hpp"

namespace hjcp {

// Straightforward single-threaded joins, kept as references for the
// step-series engine and as the serial side of the kernel benchmark.
JoinResult shj_serial(const Relation& r, const Relation& s, std::uint32_t seed = kDefaultHashSeed);
JoinResult phj_serial(const Relation& r, const Relation& s, unsigned pass_bits, unsigned passes,
                      std::uint32_t seed = kDefaultHashSeed);

// O(|R|*|S|) oracle.
JoinResult nested_loop_join(const Relation& r, const Relation& s);
// Sort-based oracle; agrees with nested_loop_join and scales to 64K inputs.
JoinResult sort_join_oracle(const Relation& r, const Relation& s);
std::size_t join_count_oracle(const Relation& r, const Relation& s);

void canonicalize(JoinResult& res);
bool same_multiset(JoinResult a, JoinResult b);

}  // namespace hjcp
