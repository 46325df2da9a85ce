#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>

#include "midx/counters.hpp"

namespace midx {

inline constexpr std::size_t kPageSize = 4096;
inline constexpr std::size_t kSmallPoolPages = 256;    // beyond-memory regime
inline constexpr std::size_t kLargePoolPages = 65536;  // in-memory regime

// Simulated LRU buffer pool. It tracks residency and dirt only; page content
// lives in the owning stores. A miss models a disk read, an evicted dirty
// page models a disk write. Shared by every store of one structure under
// test so the memory budget is per structure, not per index.
class BufferPool {
 public:
  explicit BufferPool(std::size_t capacity_pages);

  // Unique id for each store using this pool.
  std::uint32_t register_store();

  // One page fix. Counts a logical read; on a miss also counts into
  // `owner.buffer_misses`. Eviction of a dirty page counts a writeback
  // against the counters the page was last dirtied under.
  void access(std::uint32_t store_id, std::uint32_t page_no, MetricsCounters& owner);

  // Marks an already-resident page dirty (no logical read).
  void mark_dirty(std::uint32_t store_id, std::uint32_t page_no, MetricsCounters& owner);

  // Admits a freshly created page without a disk read.
  void admit(std::uint32_t store_id, std::uint32_t page_no, MetricsCounters& owner);

  // Drops a deallocated page; no writeback.
  void drop(std::uint32_t store_id, std::uint32_t page_no);

  void reset_counters();

  std::size_t capacity() const { return capacity_; }
  std::size_t resident() const { return table_.size(); }
  std::uint64_t logical_reads() const { return logical_reads_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t writebacks() const { return writebacks_; }

 private:
  struct Frame {
    std::uint64_t page = 0;
    bool dirty = false;
    MetricsCounters* owner = nullptr;
  };

  static std::uint64_t page_id(std::uint32_t store_id, std::uint32_t page_no) {
    return (static_cast<std::uint64_t>(store_id) << 32) | page_no;
  }

  void insert_front(std::uint64_t id, bool dirty, MetricsCounters& owner);
  void evict_if_full();

  std::size_t capacity_;
  std::uint32_t next_store_id_ = 1;
  std::list<Frame> lru_;  // front = most recent
  std::unordered_map<std::uint64_t, std::list<Frame>::iterator> table_;
  std::uint64_t logical_reads_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t writebacks_ = 0;
};

}  // namespace midx
