#include "midx/join.hpp"

#include <algorithm>
#include <cstdio>

#include "midx/errors.hpp"

namespace midx {

std::string_view to_string(JoinType jt) {
  switch (jt) {
    case JoinType::Inner: return "inner";
    case JoinType::LeftOuter: return "left_outer";
    case JoinType::RightOuter: return "right_outer";
    case JoinType::FullOuter: return "full_outer";
    case JoinType::LeftSemi: return "left_semi";
    case JoinType::RightSemi: return "right_semi";
  }
  return "inner";
}

JoinType join_type_from_string(std::string_view s) {
  if (s == "inner") return JoinType::Inner;
  if (s == "left_outer") return JoinType::LeftOuter;
  if (s == "right_outer") return JoinType::RightOuter;
  if (s == "full_outer") return JoinType::FullOuter;
  if (s == "left_semi") return JoinType::LeftSemi;
  if (s == "right_semi") return JoinType::RightSemi;
  throw ConfigError("unknown join type: " + std::string(s));
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u", v);
  out += buf;
}

void append_text(std::string& out, const std::string& s) {
  append_u32(out, static_cast<std::uint32_t>(s.size()));
  out += ':';
  out += s;
}

}  // namespace

std::string to_canonical_string(const JoinRow& row) {
  std::string out;
  out.reserve(160);
  append_u32(out, row.key.warehouse_id);
  out += ',';
  append_u32(out, row.key.item_id);
  out += "|ol=";
  if (row.orderline) {
    const OrderlineRecord& o = *row.orderline;
    for (std::uint32_t v : {o.warehouse_id, o.district_id, o.order_id, o.line_number,
                            o.item_id, o.supply_warehouse_id, o.delivery_date,
                            o.quantity, o.amount}) {
      append_u32(out, v);
      out += ',';
    }
    append_text(out, o.dist_info);
  } else {
    out += '-';
  }
  out += "|st=";
  if (row.stock) {
    const StockRecord& s = *row.stock;
    for (std::uint32_t v :
         {s.warehouse_id, s.item_id, s.quantity, s.year_to_date, s.order_count}) {
      append_u32(out, v);
      out += ',';
    }
    append_text(out, s.data);
    for (const std::string& d : s.district_info) {
      out += ',';
      append_text(out, d);
    }
  } else {
    out += '-';
  }
  return out;
}

std::vector<JoinRow> JoinStream::drain() {
  std::vector<JoinRow> rows;
  while (auto row = next()) rows.push_back(std::move(*row));
  return rows;
}

GroupJoinStream::GroupJoinStream(JoinType jt, StockSource stock,
                                 OrderlineSource orderlines, MetricsCounters* counters)
    : jt_(jt), stock_src_(std::move(stock)), ol_src_(std::move(orderlines)),
      counters_(counters) {
  if (!stock_src_ || !ol_src_) throw ConfigError("group join needs both sources");
}

std::optional<JoinRow> GroupJoinStream::next() {
  if (!started_) {
    la_stock_ = stock_src_();
    la_ol_ = ol_src_();
    started_ = true;
  }
  for (;;) {
    if (!out_.empty()) {
      JoinRow row = std::move(out_.front());
      out_.pop_front();
      return row;
    }
    if (!in_group_) {
      if (!la_stock_ && !la_ol_) return std::nullopt;
      open_group();
    } else {
      step_group();
    }
  }
}

// Pins the next group: picks the smallest join key on either side and
// buffers every stock row carrying it.
void GroupJoinStream::open_group() {
  JoinKey next{UINT32_MAX, UINT32_MAX};
  if (la_stock_) next = std::min(next, join_key_of(*la_stock_));
  if (la_ol_) next = std::min(next, join_key_of(*la_ol_));
  group_ = next;
  stock_buf_.clear();
  while (la_stock_ && join_key_of(*la_stock_) == group_) {
    stock_buf_.push_back(std::move(*la_stock_));
    la_stock_ = stock_src_();
  }
  if (counters_)
    counters_->group_buffer_peak =
        std::max<std::uint64_t>(counters_->group_buffer_peak, stock_buf_.size());
  group_orderlines_ = 0;
  in_group_ = true;
}

// Consumes one orderline of the current group (emitting its result rows), or
// closes the group and emits the stock-preserved leftovers.
void GroupJoinStream::step_group() {
  if (la_ol_ && join_key_of(*la_ol_) == group_) {
    OrderlineRecord ol = std::move(*la_ol_);
    la_ol_ = ol_src_();
    ++group_orderlines_;
    join_detail::emit_orderline(jt_, group_, std::move(ol), stock_buf_, out_);
    return;
  }
  join_detail::emit_group_end(jt_, group_, stock_buf_, group_orderlines_, out_);
  in_group_ = false;
}

namespace join_detail {

void emit_orderline(JoinType jt, const JoinKey& key, OrderlineRecord ol,
                    const std::vector<StockRecord>& stock_buf, std::deque<JoinRow>& out) {
  if (!stock_buf.empty()) {
    switch (jt) {
      case JoinType::Inner:
      case JoinType::LeftOuter:
      case JoinType::RightOuter:
      case JoinType::FullOuter:
        for (const StockRecord& s : stock_buf) out.push_back({key, ol, s});
        break;
      case JoinType::LeftSemi:
        out.push_back({key, std::move(ol), std::nullopt});
        break;
      case JoinType::RightSemi:
        break;
    }
  } else if (jt == JoinType::LeftOuter || jt == JoinType::FullOuter) {
    out.push_back({key, std::move(ol), std::nullopt});
  }
}

void emit_group_end(JoinType jt, const JoinKey& key, std::vector<StockRecord>& stock_buf,
                    std::uint64_t group_orderlines, std::deque<JoinRow>& out) {
  bool stock_unmatched =
      group_orderlines == 0 && (jt == JoinType::RightOuter || jt == JoinType::FullOuter);
  bool stock_semi = group_orderlines > 0 && jt == JoinType::RightSemi;
  if (stock_unmatched || stock_semi)
    for (StockRecord& s : stock_buf) out.push_back({key, std::nullopt, std::move(s)});
  stock_buf.clear();
}

}  // namespace join_detail

std::unique_ptr<JoinStream> make_group_join(JoinType jt, StockSource stock,
                                            OrderlineSource orderlines,
                                            MetricsCounters* counters) {
  return std::make_unique<GroupJoinStream>(jt, std::move(stock), std::move(orderlines),
                                           counters);
}

}  // namespace midx
