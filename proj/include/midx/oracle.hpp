#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "midx/join.hpp"
#include "midx/schema.hpp"

namespace midx {

// In-memory reference database. It consumes the same delta stream the index
// structures do, keeps rows in plain std::maps, and answers joins by brute
// force with its own column projection, so it shares no code path with the
// stores or join operators it is used to check.
class ShadowDb {
 public:
  using StockKey = std::tuple<std::uint32_t, std::uint32_t>;
  using OrderlineKey = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>;

  void apply(const Delta& d);  // throws IntegrityError on impossible deltas

  const std::map<StockKey, StockRecord>& stock() const { return stock_; }
  const std::map<OrderlineKey, OrderlineRecord>& orderlines() const { return orderlines_; }

  std::optional<StockRecord> find_stock(std::uint32_t w, std::uint32_t i) const;
  std::optional<OrderlineRecord> find_orderline(std::uint32_t w, std::uint32_t d,
                                                std::uint32_t o, std::uint32_t l) const;

  // Brute-force joins over the full database, one warehouse, or one join key.
  // Rows carry the column subset a reader of a policy-`p` index would see.
  std::vector<JoinRow> join(JoinType jt, IncludedColumnsPolicy p) const;
  std::vector<JoinRow> join_warehouse(JoinType jt, IncludedColumnsPolicy p,
                                      std::uint32_t w) const;
  std::vector<JoinRow> join_key(JoinType jt, IncludedColumnsPolicy p, std::uint32_t w,
                                std::uint32_t i) const;

 private:
  std::map<StockKey, StockRecord> stock_;
  std::map<OrderlineKey, OrderlineRecord> orderlines_;
};

// Column projection written out longhand (no shared encode/decode path).
StockRecord oracle_project(const StockRecord& s, IncludedColumnsPolicy p);
OrderlineRecord oracle_project(const OrderlineRecord& o, IncludedColumnsPolicy p);

// Sorted canonical images; two row sets are equal as multisets iff these match.
std::vector<std::string> canonical_multiset(const std::vector<JoinRow>& rows);

}  // namespace midx
