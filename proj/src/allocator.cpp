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

#include "hjcp/allocator.hpp"

#include <limits>

namespace hjcp {

Arena::Arena(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("arena capacity must be positive");
  if (capacity > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("arena capacity exceeds 32-bit offsets");
  }
  base_ = std::make_unique_for_overwrite<std::byte[]>(capacity);
}

std::optional<BlockGrant> Arena::grant_block(std::size_t block_size) {
  if (block_size == 0) throw std::invalid_argument("block size must be positive");
  std::size_t cur = cursor_.load(std::memory_order_relaxed);
  do {
    if (block_size > capacity_ || cur > capacity_ - block_size) return std::nullopt;
  } while (!cursor_.compare_exchange_weak(cur, cur + block_size, std::memory_order_acq_rel,
                                          std::memory_order_relaxed));
  grant_ops_.fetch_add(1, std::memory_order_relaxed);
  return BlockGrant{cur, block_size, 0};
}

void Arena::reset() {
  cursor_.store(0, std::memory_order_release);
  grant_ops_.store(0, std::memory_order_relaxed);
}

std::optional<std::size_t> local_alloc(BlockGrant& grant, std::size_t nbytes) {
  if (nbytes == 0) throw std::invalid_argument("allocation size must be positive");
  if (nbytes > grant.size - grant.local_cursor) return std::nullopt;
  std::size_t off = grant.offset + grant.local_cursor;
  grant.local_cursor += nbytes;
  return off;
}

WorkGroupAllocator::WorkGroupAllocator(Arena& arena, std::size_t block_size)
    : arena_(&arena), block_size_(align8(block_size)) {
  if (block_size == 0) throw std::invalid_argument("block size must be positive");
}

std::uint32_t WorkGroupAllocator::alloc(std::size_t nbytes) {
  nbytes = align8(nbytes);
  if (nbytes > block_size_) {
    auto g = arena_->grant_block(nbytes);
    if (!g) throw ArenaExhausted("arena exhausted");
    ++cursor_ops_;
    return static_cast<std::uint32_t>(g->offset);
  }
  if (grant_) {
    if (auto off = local_alloc(*grant_, nbytes)) return static_cast<std::uint32_t>(*off);
  }
  grant_ = arena_->grant_block(block_size_);
  if (!grant_) throw ArenaExhausted("arena exhausted");
  ++cursor_ops_;
  return static_cast<std::uint32_t>(*local_alloc(*grant_, nbytes));
}

std::uint32_t BasicAllocator::alloc(std::size_t nbytes) {
  auto g = arena_->grant_block(align8(nbytes));
  if (!g) throw ArenaExhausted("arena exhausted");
  ++cursor_ops_;
  return static_cast<std::uint32_t>(g->offset);
}

}  // namespace hjcp
