#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "midx/buffer_pool.hpp"
#include "midx/codec.hpp"
#include "midx/counters.hpp"

namespace midx {

enum class Backend : std::uint8_t { BTree, Lsm };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

struct Entry {
  EncodedKey key;
  std::string value;
};

struct StoreStats {
  std::uint64_t entry_count = 0;     // visible entries
  std::uint64_t payload_bytes = 0;   // key+value bytes of visible entries
  std::uint64_t stored_bytes = 0;    // key+value bytes incl. shadowed/tombstones
  std::uint64_t allocated_bytes = 0; // pages * page size (+ memtable)
  std::uint64_t page_count = 0;
  std::uint64_t run_count = 0;       // LSM only
  std::uint32_t height = 0;          // b-tree only
};

// Forward cursor over a key range; exhausted when next() returns nullopt.
class Cursor {
 public:
  virtual ~Cursor() = default;
  virtual std::optional<Entry> next() = 0;
};

// Ordered key-value store under full byte-order: the shared contract the
// merged index and both baselines are built on.
class OrderedStore {
 public:
  OrderedStore(std::string name, std::shared_ptr<BufferPool> pool);
  virtual ~OrderedStore() = default;

  virtual Backend backend() const = 0;

  // Upsert.
  virtual void put(const EncodedKey& key, std::string value) = 0;
  virtual std::optional<std::string> get(const EncodedKey& key) = 0;
  // Read-modify-write of an existing entry; false if the key is absent.
  virtual bool replace(const EncodedKey& key, std::string value) = 0;
  // Deleting an absent key is a no-op.
  virtual void erase(const EncodedKey& key) = 0;

  // Half-open range [lower, upper); empty upper bound means "to the end".
  virtual std::unique_ptr<Cursor> scan(const EncodedKey& lower,
                                       const EncodedKey& upper) = 0;
  std::unique_ptr<Cursor> scan_prefix(const EncodedKey& prefix);
  std::unique_ptr<Cursor> scan_all();

  // Batch ingestion in arrival order; duplicate keys within the batch
  // resolve to the last occurrence.
  virtual void bulk_load(std::vector<Entry> batch) = 0;

  // LSM only; the b-tree backend rejects it.
  virtual void compact() = 0;

  // Instrumentation-free snapshot.
  virtual StoreStats stats() const = 0;

  const std::string& name() const { return name_; }
  MetricsCounters& counters() { return counters_; }
  const MetricsCounters& counters() const { return counters_; }
  BufferPool& pool() { return *pool_; }

 protected:
  int compare(const EncodedKey& a, const EncodedKey& b) {
    ++counters_.key_comparisons;
    return a.bytes.compare(b.bytes);
  }

  std::string name_;
  std::shared_ptr<BufferPool> pool_;
  std::uint32_t store_id_;
  MetricsCounters counters_;
};

struct LsmOptions {
  std::size_t memtable_threshold_bytes = 64 * 1024;
  std::size_t compaction_trigger_runs = 4;
};

std::unique_ptr<OrderedStore> make_store(Backend backend, std::string name,
                                         std::shared_ptr<BufferPool> pool,
                                         LsmOptions lsm_options = {});

}  // namespace midx
