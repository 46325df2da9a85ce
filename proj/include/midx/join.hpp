#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "midx/counters.hpp"
#include "midx/schema.hpp"

namespace midx {

// The orderline table is the "left" side of every join, stock the "right".
enum class JoinType : std::uint8_t {
  Inner,
  LeftOuter,
  RightOuter,
  FullOuter,
  LeftSemi,
  RightSemi,
};

std::string_view to_string(JoinType jt);
JoinType join_type_from_string(std::string_view s);

// One result row. Outer joins leave the unmatched side empty; semi joins
// carry only the preserved side.
struct JoinRow {
  JoinKey key;
  std::optional<OrderlineRecord> orderline;
  std::optional<StockRecord> stock;

  friend bool operator==(const JoinRow&, const JoinRow&) = default;
};

// Stable textual image. Used to compare result multisets order-insensitively.
std::string to_canonical_string(const JoinRow& row);

class JoinStream {
 public:
  virtual ~JoinStream() = default;
  virtual std::optional<JoinRow> next() = 0;

  std::vector<JoinRow> drain();
};

using StockSource = std::function<std::optional<StockRecord>()>;
using OrderlineSource = std::function<std::optional<OrderlineRecord>()>;

// Group-wise join over two record sources, each ordered by join key. Buffers
// the stock rows of one group at a time and streams orderlines past the
// buffer, so memory is bounded by the widest stock-side group, never by the
// orderline side. `counters` records that high-water mark.
class GroupJoinStream final : public JoinStream {
 public:
  GroupJoinStream(JoinType jt, StockSource stock, OrderlineSource orderlines,
                  MetricsCounters* counters);

  std::optional<JoinRow> next() override;

 private:
  void open_group();
  void step_group();

  JoinType jt_;
  StockSource stock_src_;
  OrderlineSource ol_src_;
  MetricsCounters* counters_;

  bool started_ = false;
  bool in_group_ = false;
  std::optional<StockRecord> la_stock_;
  std::optional<OrderlineRecord> la_ol_;
  JoinKey group_{};
  std::vector<StockRecord> stock_buf_;
  std::uint64_t group_orderlines_ = 0;
  std::deque<JoinRow> out_;
};

std::unique_ptr<JoinStream> make_group_join(JoinType jt, StockSource stock,
                                            OrderlineSource orderlines,
                                            MetricsCounters* counters);

namespace join_detail {

// Result rows for one orderline against the group's buffered stock rows.
void emit_orderline(JoinType jt, const JoinKey& key, OrderlineRecord ol,
                    const std::vector<StockRecord>& stock_buf, std::deque<JoinRow>& out);

// Rows owed to the stock side once a group's orderlines are exhausted.
// Consumes the buffer.
void emit_group_end(JoinType jt, const JoinKey& key, std::vector<StockRecord>& stock_buf,
                    std::uint64_t group_orderlines, std::deque<JoinRow>& out);

}  // namespace join_detail

}  // namespace midx
