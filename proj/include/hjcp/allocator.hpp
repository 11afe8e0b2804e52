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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>

namespace hjcp {

inline constexpr std::size_t kDefaultBlockSize = 2048;

constexpr std::size_t align8(std::size_t n) { return (n + 7) & ~std::size_t{7}; }

class ArenaExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlockGrant {
  std::size_t offset = 0;
  std::size_t size = 0;
  std::size_t local_cursor = 0;
};

// Fixed byte region handed out in blocks by a single fetch-and-add style
// cursor. Offsets are 32-bit so capacity is capped at 4 GiB.
class Arena {
 public:
  explicit Arena(std::size_t capacity);
  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;

  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_.load(std::memory_order_acquire); }
  // Number of successful global-cursor operations since construction/reset.
  std::uint64_t grant_ops() const { return grant_ops_.load(std::memory_order_relaxed); }

  // Never moves the cursor past capacity, so a failed grant leaves no trace.
  std::optional<BlockGrant> grant_block(std::size_t block_size);

  // Drops every grant; the previous contents become garbage.
  void reset();

  std::byte* base() { return base_.get(); }
  const std::byte* base() const { return base_.get(); }

  template <class T>
  T* at(std::uint32_t offset) {
    return reinterpret_cast<T*>(base_.get() + offset);
  }
  template <class T>
  const T* at(std::uint32_t offset) const {
    return reinterpret_cast<const T*>(base_.get() + offset);
  }

 private:
  std::size_t capacity_;
  std::unique_ptr<std::byte[]> base_;
  std::atomic<std::size_t> cursor_{0};
  std::atomic<std::uint64_t> grant_ops_{0};
};

// Bump allocation inside one grant. Returns an arena offset, or nullopt when
// the block cannot hold nbytes (BlockFull).
std::optional<std::size_t> local_alloc(BlockGrant& grant, std::size_t nbytes);

// One work group's view: a current grant plus the leader-style refill. Not
// thread-safe; every concurrent worker owns its own instance.
class WorkGroupAllocator {
 public:
  WorkGroupAllocator(Arena& arena, std::size_t block_size);

  // nbytes is rounded up to 8. Requests larger than a block get their own
  // grant. Throws ArenaExhausted.
  std::uint32_t alloc(std::size_t nbytes);

  Arena& arena() { return *arena_; }
  std::size_t block_size() const { return block_size_; }
  std::uint64_t cursor_ops() const { return cursor_ops_; }
  void reset() {
    grant_.reset();
    cursor_ops_ = 0;
  }

 private:
  Arena* arena_;
  std::size_t block_size_;
  std::optional<BlockGrant> grant_;
  std::uint64_t cursor_ops_ = 0;
};

// The unoptimised baseline: every request is its own global-cursor operation.
class BasicAllocator {
 public:
  explicit BasicAllocator(Arena& arena) : arena_(&arena) {}
  std::uint32_t alloc(std::size_t nbytes);
  std::uint64_t cursor_ops() const { return cursor_ops_; }

 private:
  Arena* arena_;
  std::uint64_t cursor_ops_ = 0;
};

}  // namespace hjcp
