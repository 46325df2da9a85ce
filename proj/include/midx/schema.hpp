#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "midx/codec.hpp"

namespace midx {

// Which non-key columns an index materializes.
//   All:      every column of the record.
//   Covering: the columns needed by the two canonical join queries.
//   Keys:     key columns only (empty payload).
enum class IncludedColumnsPolicy : std::uint8_t { All, Covering, Keys };

std::string_view to_string(IncludedColumnsPolicy p);
IncludedColumnsPolicy policy_from_string(std::string_view s);

inline constexpr std::size_t kNumDistrictsPerWarehouse = 10;
inline constexpr std::size_t kStockDataChars = 50;   // max
inline constexpr std::size_t kDistInfoChars = 24;    // fixed

// Stock row. Primary key (warehouse_id, item_id) doubles as the join key.
struct StockRecord {
  std::uint32_t warehouse_id = 0;
  std::uint32_t item_id = 0;
  std::uint32_t quantity = 0;
  std::uint32_t year_to_date = 0;
  std::uint32_t order_count = 0;
  std::string data;  // <= 50 chars
  std::array<std::string, kNumDistrictsPerWarehouse> district_info;  // 24 chars each

  friend bool operator==(const StockRecord&, const StockRecord&) = default;
};

// Orderline row. Primary key (warehouse_id, district_id, order_id,
// line_number); item_id is the foreign key into stock.
struct OrderlineRecord {
  std::uint32_t warehouse_id = 0;
  std::uint32_t district_id = 0;
  std::uint32_t order_id = 0;
  std::uint32_t line_number = 0;
  std::uint32_t item_id = 0;
  std::uint32_t supply_warehouse_id = 0;
  std::uint32_t delivery_date = 0;
  std::uint32_t quantity = 0;
  std::uint32_t amount = 0;      // cents
  std::string dist_info;         // 24 chars

  friend bool operator==(const OrderlineRecord&, const OrderlineRecord&) = default;
};

struct JoinKey {
  std::uint32_t warehouse_id = 0;
  std::uint32_t item_id = 0;

  friend auto operator<=>(const JoinKey&, const JoinKey&) = default;
};

JoinKey join_key_of(const StockRecord& s);
JoinKey join_key_of(const OrderlineRecord& o);

// ---- key images ----------------------------------------------------------

// Single-table indexes.
EncodedKey stock_index_key(std::uint32_t w, std::uint32_t i);
EncodedKey orderline_index_key(const OrderlineRecord& o);
EncodedKey orderline_index_key(std::uint32_t w, std::uint32_t i, std::uint32_t d,
                               std::uint32_t o, std::uint32_t l);

// Merged index: join key, then the one-byte source tag, then the remainder
// of the source table's primary key.
EncodedKey merged_stock_key(std::uint32_t w, std::uint32_t i);
EncodedKey merged_orderline_key(const OrderlineRecord& o);
EncodedKey merged_key(const StockRecord& s);
EncodedKey merged_key(const OrderlineRecord& o);

// Join-key prefixes shared by every structure keyed (warehouse_id, item_id, ...).
EncodedKey join_key_prefix(std::uint32_t w, std::uint32_t i);
EncodedKey warehouse_prefix(std::uint32_t w);

// ---- payload images -------------------------------------------------------

// Validates field widths, then emits the policy's column subset in a fixed
// documented order. Key columns never appear in payloads.
std::string stock_payload(const StockRecord& s, IncludedColumnsPolicy p);
std::string orderline_payload(const OrderlineRecord& o, IncludedColumnsPolicy p);

// Rebuilds records from key + payload images. Columns outside the policy
// come back zero/empty.
StockRecord decode_stock(std::uint32_t w, std::uint32_t i, std::string_view payload,
                         IncludedColumnsPolicy p);
OrderlineRecord decode_orderline(std::uint32_t w, std::uint32_t d, std::uint32_t o,
                                 std::uint32_t l, std::uint32_t item,
                                 std::string_view payload, IncludedColumnsPolicy p);

// What a reader of an index built under policy `p` would see: the record
// with every column outside the policy zeroed/emptied. Implemented as an
// encode/decode round trip so it can never drift from the payload format.
StockRecord project(const StockRecord& s, IncludedColumnsPolicy p);
OrderlineRecord project(const OrderlineRecord& o, IncludedColumnsPolicy p);

// Parsed form of one merged-index entry.
struct MergedEntryView {
  JoinKey key;
  SourceTag tag = SourceTag::Stock;
  std::variant<StockRecord, OrderlineRecord> record;
};

MergedEntryView parse_merged_entry(const EncodedKey& key, std::string_view value,
                                   IncludedColumnsPolicy p);
StockRecord parse_stock_index_entry(const EncodedKey& key, std::string_view value,
                                    IncludedColumnsPolicy p);
OrderlineRecord parse_orderline_index_entry(const EncodedKey& key, std::string_view value,
                                            IncludedColumnsPolicy p);

// ---- deltas ---------------------------------------------------------------

enum class DeltaKind : std::uint8_t { Insert, Delete, Update };

using AnyRecord = std::variant<StockRecord, OrderlineRecord>;

// Single-row change with old/new images (update carries both; insert only
// new; delete only old).
struct Delta {
  DeltaKind kind = DeltaKind::Insert;
  SourceTag table = SourceTag::Stock;
  std::optional<AnyRecord> old_image;
  std::optional<AnyRecord> new_image;

  static Delta insert_stock(StockRecord s);
  static Delta insert_orderline(OrderlineRecord o);
  static Delta delete_stock(StockRecord old_s);
  static Delta delete_orderline(OrderlineRecord old_o);
  static Delta update_stock(StockRecord old_s, StockRecord new_s);
  static Delta update_orderline(OrderlineRecord old_o, OrderlineRecord new_o);

  void validate() const;  // throws ConfigError on malformed shape
};

}  // namespace midx
