#include "midx/schema.hpp"

namespace midx {

std::string_view to_string(IncludedColumnsPolicy p) {
  switch (p) {
    case IncludedColumnsPolicy::All: return "all";
    case IncludedColumnsPolicy::Covering: return "covering";
    case IncludedColumnsPolicy::Keys: return "keys";
  }
  return "?";
}

IncludedColumnsPolicy policy_from_string(std::string_view s) {
  if (s == "all") return IncludedColumnsPolicy::All;
  if (s == "covering") return IncludedColumnsPolicy::Covering;
  if (s == "keys") return IncludedColumnsPolicy::Keys;
  throw ConfigError("unknown included-columns policy: " + std::string(s));
}

JoinKey join_key_of(const StockRecord& s) { return {s.warehouse_id, s.item_id}; }
JoinKey join_key_of(const OrderlineRecord& o) { return {o.warehouse_id, o.item_id}; }

EncodedKey stock_index_key(std::uint32_t w, std::uint32_t i) {
  EncodedKey k;
  put_u32(k.bytes, w);
  put_u32(k.bytes, i);
  return k;
}

EncodedKey orderline_index_key(std::uint32_t w, std::uint32_t i, std::uint32_t d,
                               std::uint32_t o, std::uint32_t l) {
  EncodedKey k;
  put_u32(k.bytes, w);
  put_u32(k.bytes, i);
  put_u32(k.bytes, d);
  put_u32(k.bytes, o);
  put_u32(k.bytes, l);
  return k;
}

EncodedKey orderline_index_key(const OrderlineRecord& o) {
  return orderline_index_key(o.warehouse_id, o.item_id, o.district_id, o.order_id,
                             o.line_number);
}

EncodedKey merged_stock_key(std::uint32_t w, std::uint32_t i) {
  EncodedKey k;
  put_u32(k.bytes, w);
  put_u32(k.bytes, i);
  put_tag(k.bytes, SourceTag::Stock);
  return k;
}

EncodedKey merged_orderline_key(const OrderlineRecord& o) {
  EncodedKey k;
  put_u32(k.bytes, o.warehouse_id);
  put_u32(k.bytes, o.item_id);
  put_tag(k.bytes, SourceTag::Orderline);
  put_u32(k.bytes, o.district_id);
  put_u32(k.bytes, o.order_id);
  put_u32(k.bytes, o.line_number);
  return k;
}

EncodedKey merged_key(const StockRecord& s) {
  return merged_stock_key(s.warehouse_id, s.item_id);
}

EncodedKey merged_key(const OrderlineRecord& o) { return merged_orderline_key(o); }

EncodedKey join_key_prefix(std::uint32_t w, std::uint32_t i) {
  EncodedKey k;
  put_u32(k.bytes, w);
  put_u32(k.bytes, i);
  return k;
}

EncodedKey warehouse_prefix(std::uint32_t w) {
  EncodedKey k;
  put_u32(k.bytes, w);
  return k;
}

namespace {

void check_stock_widths(const StockRecord& s) {
  if (s.data.size() > kStockDataChars)
    throw EncodingError("stock data exceeds " + std::to_string(kStockDataChars) + " chars");
  for (const auto& d : s.district_info) {
    if (!d.empty() && d.size() != kDistInfoChars)
      throw EncodingError("district_info field must be empty or exactly " +
                          std::to_string(kDistInfoChars) + " chars");
  }
}

void check_orderline_widths(const OrderlineRecord& o) {
  if (!o.dist_info.empty() && o.dist_info.size() != kDistInfoChars)
    throw EncodingError("dist_info must be empty or exactly " +
                        std::to_string(kDistInfoChars) + " chars");
}

}  // namespace

std::string stock_payload(const StockRecord& s, IncludedColumnsPolicy p) {
  check_stock_widths(s);
  std::string out;
  if (p == IncludedColumnsPolicy::Keys) return out;
  put_u32(out, s.quantity);
  put_u32(out, s.year_to_date);
  put_u32(out, s.order_count);
  put_text(out, s.data);
  if (p == IncludedColumnsPolicy::All) {
    for (const auto& d : s.district_info) put_text(out, d);
  }
  return out;
}

std::string orderline_payload(const OrderlineRecord& o, IncludedColumnsPolicy p) {
  check_orderline_widths(o);
  std::string out;
  if (p == IncludedColumnsPolicy::Keys) return out;
  put_u32(out, o.delivery_date);
  put_u32(out, o.amount);
  put_u32(out, o.quantity);
  if (p == IncludedColumnsPolicy::All) {
    put_u32(out, o.supply_warehouse_id);
    put_text(out, o.dist_info);
  }
  return out;
}

StockRecord decode_stock(std::uint32_t w, std::uint32_t i, std::string_view payload,
                         IncludedColumnsPolicy p) {
  StockRecord s;
  s.warehouse_id = w;
  s.item_id = i;
  if (p == IncludedColumnsPolicy::Keys) {
    if (!payload.empty()) throw EncodingError("keys-policy stock payload not empty");
    return s;
  }
  ByteReader r(payload);
  s.quantity = r.take_u32();
  s.year_to_date = r.take_u32();
  s.order_count = r.take_u32();
  s.data = r.take_text();
  if (p == IncludedColumnsPolicy::All) {
    for (auto& d : s.district_info) d = r.take_text();
  }
  if (!r.done()) throw EncodingError("trailing bytes in stock payload");
  return s;
}

OrderlineRecord decode_orderline(std::uint32_t w, std::uint32_t d, std::uint32_t o,
                                 std::uint32_t l, std::uint32_t item,
                                 std::string_view payload, IncludedColumnsPolicy p) {
  OrderlineRecord ol;
  ol.warehouse_id = w;
  ol.district_id = d;
  ol.order_id = o;
  ol.line_number = l;
  ol.item_id = item;
  if (p == IncludedColumnsPolicy::Keys) {
    if (!payload.empty()) throw EncodingError("keys-policy orderline payload not empty");
    return ol;
  }
  ByteReader r(payload);
  ol.delivery_date = r.take_u32();
  ol.amount = r.take_u32();
  ol.quantity = r.take_u32();
  if (p == IncludedColumnsPolicy::All) {
    ol.supply_warehouse_id = r.take_u32();
    ol.dist_info = r.take_text();
  }
  if (!r.done()) throw EncodingError("trailing bytes in orderline payload");
  return ol;
}

MergedEntryView parse_merged_entry(const EncodedKey& key, std::string_view value,
                                   IncludedColumnsPolicy p) {
  ByteReader r(key.bytes);
  MergedEntryView v;
  v.key.warehouse_id = r.take_u32();
  v.key.item_id = r.take_u32();
  v.tag = r.take_tag();
  if (v.tag == SourceTag::Stock) {
    if (!r.done()) throw EncodingError("trailing bytes in merged stock key");
    v.record = decode_stock(v.key.warehouse_id, v.key.item_id, value, p);
  } else {
    std::uint32_t d = r.take_u32();
    std::uint32_t o = r.take_u32();
    std::uint32_t l = r.take_u32();
    if (!r.done()) throw EncodingError("trailing bytes in merged orderline key");
    v.record = decode_orderline(v.key.warehouse_id, d, o, l, v.key.item_id, value, p);
  }
  return v;
}

StockRecord parse_stock_index_entry(const EncodedKey& key, std::string_view value,
                                    IncludedColumnsPolicy p) {
  ByteReader r(key.bytes);
  std::uint32_t w = r.take_u32();
  std::uint32_t i = r.take_u32();
  if (!r.done()) throw EncodingError("trailing bytes in stock index key");
  return decode_stock(w, i, value, p);
}

OrderlineRecord parse_orderline_index_entry(const EncodedKey& key, std::string_view value,
                                            IncludedColumnsPolicy p) {
  ByteReader r(key.bytes);
  std::uint32_t w = r.take_u32();
  std::uint32_t i = r.take_u32();
  std::uint32_t d = r.take_u32();
  std::uint32_t o = r.take_u32();
  std::uint32_t l = r.take_u32();
  if (!r.done()) throw EncodingError("trailing bytes in orderline index key");
  return decode_orderline(w, d, o, l, i, value, p);
}

Delta Delta::insert_stock(StockRecord s) {
  return {DeltaKind::Insert, SourceTag::Stock, std::nullopt, AnyRecord(std::move(s))};
}
Delta Delta::insert_orderline(OrderlineRecord o) {
  return {DeltaKind::Insert, SourceTag::Orderline, std::nullopt, AnyRecord(std::move(o))};
}
Delta Delta::delete_stock(StockRecord old_s) {
  return {DeltaKind::Delete, SourceTag::Stock, AnyRecord(std::move(old_s)), std::nullopt};
}
Delta Delta::delete_orderline(OrderlineRecord old_o) {
  return {DeltaKind::Delete, SourceTag::Orderline, AnyRecord(std::move(old_o)), std::nullopt};
}
Delta Delta::update_stock(StockRecord old_s, StockRecord new_s) {
  return {DeltaKind::Update, SourceTag::Stock, AnyRecord(std::move(old_s)),
          AnyRecord(std::move(new_s))};
}
Delta Delta::update_orderline(OrderlineRecord old_o, OrderlineRecord new_o) {
  return {DeltaKind::Update, SourceTag::Orderline, AnyRecord(std::move(old_o)),
          AnyRecord(std::move(new_o))};
}

StockRecord project(const StockRecord& s, IncludedColumnsPolicy p) {
  return decode_stock(s.warehouse_id, s.item_id, stock_payload(s, p), p);
}

OrderlineRecord project(const OrderlineRecord& o, IncludedColumnsPolicy p) {
  return decode_orderline(o.warehouse_id, o.district_id, o.order_id, o.line_number,
                          o.item_id, orderline_payload(o, p), p);
}

void Delta::validate() const {
  auto table_matches = [&](const std::optional<AnyRecord>& r) {
    if (!r) return true;
    bool is_stock = std::holds_alternative<StockRecord>(*r);
    return is_stock == (table == SourceTag::Stock);
  };
  if (!table_matches(old_image) || !table_matches(new_image))
    throw ConfigError("delta image table does not match delta.table");
  switch (kind) {
    case DeltaKind::Insert:
      if (old_image || !new_image) throw ConfigError("insert delta needs new image only");
      break;
    case DeltaKind::Delete:
      if (!old_image || new_image) throw ConfigError("delete delta needs old image only");
      break;
    case DeltaKind::Update:
      if (!old_image || !new_image) throw ConfigError("update delta needs both images");
      break;
  }
}

}  // namespace midx
