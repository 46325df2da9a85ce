#include "midx/oracle.hpp"

#include <algorithm>

#include "midx/errors.hpp"

namespace midx {

namespace {

ShadowDb::StockKey key_of(const StockRecord& s) {
  return {s.warehouse_id, s.item_id};
}

ShadowDb::OrderlineKey key_of(const OrderlineRecord& o) {
  return {o.warehouse_id, o.district_id, o.order_id, o.line_number};
}

template <class Map, class Rec>
void shadow_insert(Map& m, const Rec& rec) {
  auto [it, inserted] = m.emplace(key_of(rec), rec);
  (void)it;
  if (!inserted) throw IntegrityError("oracle: insert over existing row");
}

template <class Map, class Rec>
void shadow_delete(Map& m, const Rec& old_rec) {
  auto it = m.find(key_of(old_rec));
  if (it == m.end()) throw IntegrityError("oracle: delete of missing row");
  if (!(it->second == old_rec)) throw IntegrityError("oracle: delete old image mismatch");
  m.erase(it);
}

template <class Map, class Rec>
void shadow_update(Map& m, const Rec& old_rec, const Rec& new_rec) {
  shadow_delete(m, old_rec);
  shadow_insert(m, new_rec);
}

}  // namespace

void ShadowDb::apply(const Delta& d) {
  d.validate();
  if (d.table == SourceTag::Stock) {
    switch (d.kind) {
      case DeltaKind::Insert:
        shadow_insert(stock_, std::get<StockRecord>(*d.new_image));
        break;
      case DeltaKind::Delete:
        shadow_delete(stock_, std::get<StockRecord>(*d.old_image));
        break;
      case DeltaKind::Update:
        shadow_update(stock_, std::get<StockRecord>(*d.old_image),
                      std::get<StockRecord>(*d.new_image));
        break;
    }
  } else {
    switch (d.kind) {
      case DeltaKind::Insert:
        shadow_insert(orderlines_, std::get<OrderlineRecord>(*d.new_image));
        break;
      case DeltaKind::Delete:
        shadow_delete(orderlines_, std::get<OrderlineRecord>(*d.old_image));
        break;
      case DeltaKind::Update:
        shadow_update(orderlines_, std::get<OrderlineRecord>(*d.old_image),
                      std::get<OrderlineRecord>(*d.new_image));
        break;
    }
  }
}

std::optional<StockRecord> ShadowDb::find_stock(std::uint32_t w, std::uint32_t i) const {
  auto it = stock_.find({w, i});
  if (it == stock_.end()) return std::nullopt;
  return it->second;
}

std::optional<OrderlineRecord> ShadowDb::find_orderline(std::uint32_t w, std::uint32_t d,
                                                        std::uint32_t o,
                                                        std::uint32_t l) const {
  auto it = orderlines_.find({w, d, o, l});
  if (it == orderlines_.end()) return std::nullopt;
  return it->second;
}

StockRecord oracle_project(const StockRecord& s, IncludedColumnsPolicy p) {
  StockRecord out;
  out.warehouse_id = s.warehouse_id;
  out.item_id = s.item_id;
  if (p == IncludedColumnsPolicy::Keys) return out;
  out.quantity = s.quantity;
  out.year_to_date = s.year_to_date;
  out.order_count = s.order_count;
  out.data = s.data;
  if (p == IncludedColumnsPolicy::Covering) return out;
  out.district_info = s.district_info;
  return out;
}

OrderlineRecord oracle_project(const OrderlineRecord& o, IncludedColumnsPolicy p) {
  OrderlineRecord out;
  out.warehouse_id = o.warehouse_id;
  out.district_id = o.district_id;
  out.order_id = o.order_id;
  out.line_number = o.line_number;
  out.item_id = o.item_id;
  if (p == IncludedColumnsPolicy::Keys) return out;
  out.delivery_date = o.delivery_date;
  out.amount = o.amount;
  out.quantity = o.quantity;
  if (p == IncludedColumnsPolicy::Covering) return out;
  out.supply_warehouse_id = o.supply_warehouse_id;
  out.dist_info = o.dist_info;
  return out;
}

namespace {

// Shared brute-force core over pre-filtered row lists.
std::vector<JoinRow> brute_join(JoinType jt, IncludedColumnsPolicy p,
                                const std::vector<const StockRecord*>& stock,
                                const std::vector<const OrderlineRecord*>& lines) {
  std::map<JoinKey, std::vector<const StockRecord*>> groups;
  for (const StockRecord* s : stock) groups[join_key_of(*s)].push_back(s);
  std::map<JoinKey, bool> group_has_line;
  for (const OrderlineRecord* o : lines) group_has_line[join_key_of(*o)] = true;

  std::vector<JoinRow> rows;
  for (const OrderlineRecord* o : lines) {
    JoinKey k = join_key_of(*o);
    auto git = groups.find(k);
    bool matched = git != groups.end();
    switch (jt) {
      case JoinType::Inner:
      case JoinType::RightOuter:
        if (matched)
          for (const StockRecord* s : git->second)
            rows.push_back({k, oracle_project(*o, p), oracle_project(*s, p)});
        break;
      case JoinType::LeftOuter:
      case JoinType::FullOuter:
        if (matched)
          for (const StockRecord* s : git->second)
            rows.push_back({k, oracle_project(*o, p), oracle_project(*s, p)});
        else
          rows.push_back({k, oracle_project(*o, p), std::nullopt});
        break;
      case JoinType::LeftSemi:
        if (matched) rows.push_back({k, oracle_project(*o, p), std::nullopt});
        break;
      case JoinType::RightSemi:
        break;
    }
  }
  if (jt == JoinType::RightOuter || jt == JoinType::FullOuter || jt == JoinType::RightSemi) {
    for (const auto& [k, members] : groups) {
      bool has_line = group_has_line.count(k) > 0;
      bool emit = jt == JoinType::RightSemi ? has_line : !has_line;
      if (emit)
        for (const StockRecord* s : members)
          rows.push_back({k, std::nullopt, oracle_project(*s, p)});
    }
  }
  return rows;
}

}  // namespace

std::vector<JoinRow> ShadowDb::join(JoinType jt, IncludedColumnsPolicy p) const {
  std::vector<const StockRecord*> stock;
  stock.reserve(stock_.size());
  for (const auto& [k, s] : stock_) stock.push_back(&s);
  std::vector<const OrderlineRecord*> lines;
  lines.reserve(orderlines_.size());
  for (const auto& [k, o] : orderlines_) lines.push_back(&o);
  return brute_join(jt, p, stock, lines);
}

std::vector<JoinRow> ShadowDb::join_warehouse(JoinType jt, IncludedColumnsPolicy p,
                                              std::uint32_t w) const {
  std::vector<const StockRecord*> stock;
  for (const auto& [k, s] : stock_)
    if (s.warehouse_id == w) stock.push_back(&s);
  std::vector<const OrderlineRecord*> lines;
  for (const auto& [k, o] : orderlines_)
    if (o.warehouse_id == w) lines.push_back(&o);
  return brute_join(jt, p, stock, lines);
}

std::vector<JoinRow> ShadowDb::join_key(JoinType jt, IncludedColumnsPolicy p,
                                        std::uint32_t w, std::uint32_t i) const {
  std::vector<const StockRecord*> stock;
  for (const auto& [k, s] : stock_)
    if (s.warehouse_id == w && s.item_id == i) stock.push_back(&s);
  std::vector<const OrderlineRecord*> lines;
  for (const auto& [k, o] : orderlines_)
    if (o.warehouse_id == w && o.item_id == i) lines.push_back(&o);
  return brute_join(jt, p, stock, lines);
}

std::vector<std::string> canonical_multiset(const std::vector<JoinRow>& rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const JoinRow& r : rows) out.push_back(to_canonical_string(r));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace midx
