#pragma once

#include <functional>
#include <map>
#include <optional>

#include "midx/store.hpp"

namespace midx {

// Log-structured merge forest: an in-memory memtable plus immutable sorted
// runs laid out in page-size chunks. Deletes are tombstones; visibility is
// newest-first (memtable, then runs youngest to oldest). Reaching the run
// trigger merges the whole forest into one run; bulk loads defer that merge
// so ingestion cost stays flush-only.
class LsmStore final : public OrderedStore {
 public:
  LsmStore(std::string name, std::shared_ptr<BufferPool> pool, LsmOptions options);

  Backend backend() const override { return Backend::Lsm; }

  void put(const EncodedKey& key, std::string value) override;
  std::optional<std::string> get(const EncodedKey& key) override;
  bool replace(const EncodedKey& key, std::string value) override;
  void erase(const EncodedKey& key) override;
  std::unique_ptr<Cursor> scan(const EncodedKey& lower, const EncodedKey& upper) override;
  void bulk_load(std::vector<Entry> batch) override;
  void compact() override;
  StoreStats stats() const override;

  std::size_t run_count() const { return runs_.size(); }
  std::size_t memtable_entries() const { return mem_.size(); }

 private:
  struct RunEntry {
    std::string key;
    std::string value;
    bool tombstone = false;
  };
  struct RunPage {
    std::vector<RunEntry> entries;
    std::size_t bytes = 0;
    std::uint32_t page_no = 0;
  };
  struct Run {
    std::vector<RunPage> pages;
    std::vector<std::string> fences;  // first key per page
    std::uint64_t entry_count = 0;
    std::uint64_t byte_size = 0;  // key+value bytes incl. tombstone keys
    std::uint64_t tombstones = 0;
  };

  static constexpr std::size_t kPageHeaderBytes = 64;
  static constexpr std::size_t kPageCapacity = kPageSize - kPageHeaderBytes;
  static constexpr std::size_t kSlotOverhead = 9;  // lengths + tombstone flag

  static std::size_t slot_bytes(const std::string& k, const std::string& v) {
    return k.size() + v.size() + kSlotOverhead;
  }

  struct CountingLess {
    MetricsCounters* counters;
    bool operator()(const std::string& a, const std::string& b) const {
      ++counters->key_comparisons;
      return a < b;
    }
  };
  using Memtable = std::map<std::string, std::optional<std::string>, CountingLess>;

  void memtable_upsert(const std::string& key, std::optional<std::string> value);
  void maybe_flush(bool allow_auto_compaction);
  void flush_memtable();
  void merge_runs();
  std::optional<std::optional<std::string>> lookup(const EncodedKey& key);

  // Uninstrumented visible-entry walk for stats().
  void for_each_visible(const std::function<void(const std::string&, const std::string&)>& fn) const;

  friend class LsmCursor;

  LsmOptions options_;
  Memtable mem_;
  std::size_t mem_bytes_ = 0;
  std::vector<Run> runs_;  // oldest first
  std::uint32_t next_page_no_ = 1;
};

}  // namespace midx
