#pragma once

#include <map>
#include <unordered_map>

#include "midx/store.hpp"

namespace midx {

// Paged B-tree with a classic slotted layout simulated at byte granularity:
// fixed page size, byte-midpoint splits, no merge-on-underflow (pages are
// freed when they empty), all leaves at equal depth, doubly linked leaf
// chain for range scans.
class BTreeStore final : public OrderedStore {
 public:
  BTreeStore(std::string name, std::shared_ptr<BufferPool> pool);

  Backend backend() const override { return Backend::BTree; }

  void put(const EncodedKey& key, std::string value) override;
  std::optional<std::string> get(const EncodedKey& key) override;
  bool replace(const EncodedKey& key, std::string value) override;
  void erase(const EncodedKey& key) override;
  std::unique_ptr<Cursor> scan(const EncodedKey& lower, const EncodedKey& upper) override;
  void bulk_load(std::vector<Entry> batch) override;
  void compact() override;  // throws UnsupportedError
  StoreStats stats() const override;

  struct ValidationReport {
    bool ok = true;
    std::string message;
  };
  // Structural walk: equal leaf depth, sorted keys, separator bounds, leaf
  // chain consistency, byte accounting. Occupancy (every non-root node at
  // least half full up to one-entry rounding) only holds for insert/bulk-load
  // trees: free-at-empty deletion may leave emptier pages.
  ValidationReport validate(bool check_occupancy) const;

  std::uint32_t height() const { return height_; }

 private:
  struct Page {
    bool leaf = true;
    std::vector<std::string> keys;
    std::vector<std::string> vals;          // leaf
    std::vector<std::uint32_t> kids;        // inner: keys.size()+1
    std::uint32_t next = 0;                 // leaf chain
    std::uint32_t prev = 0;
    std::size_t used = 0;
  };

  static constexpr std::size_t kPageHeaderBytes = 64;
  static constexpr std::size_t kPageCapacity = kPageSize - kPageHeaderBytes;
  static constexpr std::size_t kLeafSlotOverhead = 8;
  static constexpr std::size_t kInnerSlotOverhead = 12;  // child id + key length

  static std::size_t leaf_slot_bytes(const std::string& k, const std::string& v) {
    return k.size() + v.size() + kLeafSlotOverhead;
  }
  static std::size_t inner_slot_bytes(const std::string& k) {
    return k.size() + kInnerSlotOverhead;
  }

  Page& page(std::uint32_t id) { return pages_.at(id); }
  const Page& page(std::uint32_t id) const { return pages_.at(id); }

  std::uint32_t alloc_page(bool leaf);
  void free_page(std::uint32_t id);
  void visit(std::uint32_t id);   // counted page fix
  void dirty(std::uint32_t id);   // counted page write

  // Descent path: (page id, child index taken), leaf last.
  struct DescentPath {
    std::vector<std::pair<std::uint32_t, std::size_t>> inner;
    std::uint32_t leaf = 0;
  };
  DescentPath descend(std::string_view key_bytes);
  DescentPath descend_leftmost();

  std::size_t child_index(const Page& p, std::string_view key);
  std::size_t leaf_lower_bound(const Page& p, std::string_view key);

  enum class UpsertMode { Put, ReplaceOnly };
  bool upsert(const EncodedKey& key, std::string value, UpsertMode mode);

  void split_leaf(std::uint32_t id, DescentPath& path);
  void split_inner(std::uint32_t id, std::size_t path_index, DescentPath& path);
  void insert_into_parent(DescentPath& path, std::size_t level, std::string sep,
                          std::uint32_t right_id);
  void remove_child(DescentPath& path, std::size_t level, std::uint32_t child_id);
  void collapse_root();

  void build_from_sorted(std::vector<Entry>&& entries);

  friend class BTreeCursor;

  std::unordered_map<std::uint32_t, Page> pages_;
  std::uint32_t root_ = 0;
  std::uint32_t next_page_no_ = 1;
  std::uint32_t height_ = 1;
  std::uint64_t entry_count_ = 0;
  std::uint64_t payload_bytes_ = 0;
};

}  // namespace midx
