#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "midx/join.hpp"
#include "midx/schema.hpp"
#include "midx/store.hpp"

namespace midx {

// Baseline one: each table in its own join-ordered index, joins computed on
// demand by a group-wise sort-merge over both.
class TraditionalIndexes {
 public:
  TraditionalIndexes(Backend backend, IncludedColumnsPolicy policy,
                     std::shared_ptr<BufferPool> pool, LsmOptions lsm_options = {});

  IncludedColumnsPolicy policy() const { return policy_; }

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

  std::unique_ptr<JoinStream> join_all(JoinType jt);
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w);
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w, std::uint32_t i);

  std::vector<StockRecord> extract_stock();
  std::vector<OrderlineRecord> extract_orderlines();

  void bulk_load(const std::vector<StockRecord>& stock,
                 const std::vector<OrderlineRecord>& orderlines);
  void compact();

  OrderedStore& stock_store() { return *stock_store_; }
  OrderedStore& orderline_store() { return *orderline_store_; }
  std::vector<OrderedStore*> stores();
  MetricsCounters& extra() { return extra_; }

 private:
  std::unique_ptr<JoinStream> join_range(JoinType jt, const EncodedKey& stock_prefix,
                                         const EncodedKey& orderline_prefix);

  IncludedColumnsPolicy policy_;
  std::unique_ptr<OrderedStore> stock_store_;
  std::unique_ptr<OrderedStore> orderline_store_;
  MetricsCounters extra_;  // operator-level counters (group buffer peak)
};

// Baseline two: the join itself materialized in an ordered store, kept fresh
// incrementally, with one support index per base table feeding maintenance.
//
// View rows sort by (warehouse_id, item_id, row class, pk remainder). Row
// class 0x00 is a group's stock-only pad (present only in a full-outer view
// when the group has no orderlines); 0x01 rows carry one orderline plus an
// embedded copy of the group's stock row when it exists.
class MaterializedJoinView {
 public:
  MaterializedJoinView(Backend backend, IncludedColumnsPolicy policy, JoinType stored,
                       std::shared_ptr<BufferPool> pool, LsmOptions lsm_options = {});

  IncludedColumnsPolicy policy() const { return policy_; }
  JoinType stored_join() const { return stored_; }

  // True when a view storing `stored` can answer `asked` by filtering.
  static bool can_answer(JoinType stored, JoinType asked);

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

  // Throw UnsupportedError when the stored join cannot answer jt.
  std::unique_ptr<JoinStream> join_all(JoinType jt);
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w);
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w, std::uint32_t i);

  std::vector<StockRecord> extract_stock();
  std::vector<OrderlineRecord> extract_orderlines();

  void bulk_load(const std::vector<StockRecord>& stock,
                 const std::vector<OrderlineRecord>& orderlines);
  void compact();

  OrderedStore& view_store() { return *view_; }
  OrderedStore& stock_support() { return *stock_support_; }
  OrderedStore& orderline_support() { return *orderline_support_; }
  std::vector<OrderedStore*> stores();
  MetricsCounters& extra() { return extra_; }

 private:
  struct ViewLine {
    std::uint32_t d = 0, o = 0, l = 0;
    bool stock_present = false;
    std::string stock_bytes;
    std::string line_bytes;
  };
  struct GroupImage {
    std::optional<std::string> pad;  // pad row's stock payload
    std::vector<ViewLine> lines;
  };

  GroupImage read_group(std::uint32_t w, std::uint32_t i);
  void insert_stock_full(const StockRecord& s);
  void insert_stock_inner(const StockRecord& s);
  void erase_stock_full(const StockRecord& s);
  void erase_stock_inner(const StockRecord& s);
  void replace_stock_payload(const StockRecord& s);
  void insert_line(const OrderlineRecord& o);
  void erase_line(const OrderlineRecord& o);
  void replace_line_payload(const OrderlineRecord& o);

  IncludedColumnsPolicy policy_;
  JoinType stored_;
  std::unique_ptr<OrderedStore> view_;
  std::unique_ptr<OrderedStore> stock_support_;
  std::unique_ptr<OrderedStore> orderline_support_;
  MetricsCounters extra_;
};

}  // namespace midx
