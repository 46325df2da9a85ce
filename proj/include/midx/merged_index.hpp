#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "midx/join.hpp"
#include "midx/schema.hpp"
#include "midx/store.hpp"

namespace midx {

// Both tables interleaved in one ordered store. Entries sort by
// (warehouse_id, item_id, source tag, pk remainder), so every join group is
// one contiguous key range with the stock rows in front of the orderlines.
// Joins become a single range scan; the price is a one-byte wider key and
// mixed-table pages.
class MergedIndex {
 public:
  MergedIndex(Backend backend, IncludedColumnsPolicy policy,
              std::shared_ptr<BufferPool> pool, LsmOptions lsm_options = {});

  IncludedColumnsPolicy policy() const { return policy_; }

  // Row maintenance. An update whose key columns changed degrades to
  // delete + insert; otherwise it is one in-place replace.
  void insert(const StockRecord& s);
  void insert(const OrderlineRecord& o);
  void update(const StockRecord& old_s, const StockRecord& new_s);
  void update(const OrderlineRecord& old_o, const OrderlineRecord& new_o);
  void erase(const StockRecord& s);
  void erase(const OrderlineRecord& o);
  void apply(const Delta& d);

  std::optional<StockRecord> get_stock(std::uint32_t w, std::uint32_t i);
  std::optional<OrderlineRecord> get_orderline(std::uint32_t w, std::uint32_t i,
                                               std::uint32_t d, std::uint32_t o,
                                               std::uint32_t l);

  // Joins ride directly on merged range scans.
  std::unique_ptr<JoinStream> join_all(JoinType jt);
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w);
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w, std::uint32_t i);

  // Single-table reads have to walk past the other table's entries.
  std::vector<StockRecord> extract_stock();
  std::vector<OrderlineRecord> extract_orderlines();

  void bulk_load(const std::vector<StockRecord>& stock,
                 const std::vector<OrderlineRecord>& orderlines);
  void compact();

  OrderedStore& store() { return *store_; }
  const OrderedStore& store() const { return *store_; }

 private:
  IncludedColumnsPolicy policy_;
  std::unique_ptr<OrderedStore> store_;
};

}  // namespace midx
