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

#include "hjcp/join.hpp"
#include "hjcp/largejoin.hpp"

using namespace hjcp;

TEST_CASE("inputs that fit are joined in the buffer") {
  const Relation r = gen_skewed(10000, 10, 1);
  const Relation s = gen_probe(r, 10000, 0.5, 2);
  LargeJoinOptions opt;
  opt.buffer_bytes = 64ULL << 20;
  const LargeJoinReport rep = large_join(r, s, default_profile_set(), opt);
  CHECK(rep.in_buffer);
  CHECK(rep.spilled_bytes == 0);
  CHECK(same_multiset(rep.result, sort_join_oracle(r, s)));
}

TEST_CASE("small buffers spill and still match the oracle") {
  const Relation r = gen_skewed(60000, 25, 3);
  const Relation s = gen_probe(r, 60000, 1.0, 4);
  LargeJoinOptions opt;
  opt.buffer_bytes = 256 << 10;
  const LargeJoinReport rep = large_join(r, s, default_profile_set(), opt);
  CHECK_FALSE(rep.in_buffer);
  CHECK(rep.bits > 0);
  CHECK(rep.chunks > 1);
  CHECK(rep.spilled_bytes >= (r.size() + s.size()) * 8);
  CHECK(rep.copy_time > 0.0);
  CHECK(rep.partition_time > 0.0);
  CHECK(rep.join_time > 0.0);
  CHECK(same_multiset(rep.result, sort_join_oracle(r, s)));
  CHECK(join_footprint(r.size(), s.size(), kDefaultBlockSize) > opt.buffer_bytes);
}

TEST_CASE("a buffer too small for any plan is reported") {
  const Relation r = gen_uniform(60000, KeyRange{}, 5);
  const Relation s = gen_uniform(60000, KeyRange{}, 6);
  LargeJoinOptions opt;
  opt.buffer_bytes = 8 << 10;
  opt.max_passes = 1;
  opt.pass_bits = 2;
  CHECK_THROWS_AS(large_join(r, s, default_profile_set(), opt), BufferOverflow);
}
