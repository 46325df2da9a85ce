#include "midx/buffer_pool.hpp"

#include "midx/errors.hpp"

namespace midx {

BufferPool::BufferPool(std::size_t capacity_pages) : capacity_(capacity_pages) {
  if (capacity_ == 0) throw ConfigError("buffer pool capacity must be positive");
}

std::uint32_t BufferPool::register_store() { return next_store_id_++; }

void BufferPool::access(std::uint32_t store_id, std::uint32_t page_no,
                        MetricsCounters& owner) {
  ++logical_reads_;
  auto id = page_id(store_id, page_no);
  auto it = table_.find(id);
  if (it != table_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  ++misses_;
  ++owner.buffer_misses;
  insert_front(id, /*dirty=*/false, owner);
}

void BufferPool::mark_dirty(std::uint32_t store_id, std::uint32_t page_no,
                            MetricsCounters& owner) {
  auto id = page_id(store_id, page_no);
  auto it = table_.find(id);
  if (it == table_.end()) {
    // Dirtying a non-resident page implies a fix first.
    access(store_id, page_no, owner);
    it = table_.find(id);
  }
  it->second->dirty = true;
  it->second->owner = &owner;
}

void BufferPool::admit(std::uint32_t store_id, std::uint32_t page_no,
                       MetricsCounters& owner) {
  auto id = page_id(store_id, page_no);
  auto it = table_.find(id);
  if (it != table_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    it->second->dirty = true;
    it->second->owner = &owner;
    return;
  }
  insert_front(id, /*dirty=*/true, owner);
}

void BufferPool::drop(std::uint32_t store_id, std::uint32_t page_no) {
  auto it = table_.find(page_id(store_id, page_no));
  if (it == table_.end()) return;
  lru_.erase(it->second);
  table_.erase(it);
}

void BufferPool::insert_front(std::uint64_t id, bool dirty, MetricsCounters& owner) {
  evict_if_full();
  lru_.push_front(Frame{id, dirty, &owner});
  table_[id] = lru_.begin();
}

void BufferPool::evict_if_full() {
  if (table_.size() < capacity_) return;
  Frame victim = lru_.back();
  table_.erase(victim.page);
  lru_.pop_back();
  if (victim.dirty) {
    ++writebacks_;
    if (victim.owner) ++victim.owner->dirty_writebacks;
  }
}

void BufferPool::reset_counters() {
  logical_reads_ = 0;
  misses_ = 0;
  writebacks_ = 0;
}

}  // namespace midx
