#include "midx/merged_index.hpp"

#include <algorithm>
#include <deque>

#include "midx/errors.hpp"

namespace midx {

namespace {

// Group-wise join over one interleaved scan. The tag byte sorts stock before
// orderlines inside a group, so the stream buffers the stock prefix of each
// group and joins the orderline suffix against it on the fly.
class MergedJoinStream final : public JoinStream {
 public:
  MergedJoinStream(JoinType jt, IncludedColumnsPolicy policy,
                   std::unique_ptr<Cursor> cursor, MetricsCounters* counters)
      : jt_(jt), policy_(policy), cursor_(std::move(cursor)), counters_(counters) {}

  std::optional<JoinRow> next() override {
    if (!started_) {
      advance();
      started_ = true;
    }
    for (;;) {
      if (!out_.empty()) {
        JoinRow row = std::move(out_.front());
        out_.pop_front();
        return row;
      }
      if (!in_group_) {
        if (!la_) return std::nullopt;
        open_group();
      } else {
        step_group();
      }
    }
  }

 private:
  void advance() {
    auto entry = cursor_->next();
    if (!entry) {
      la_.reset();
      return;
    }
    la_ = parse_merged_entry(entry->key, entry->value, policy_);
  }

  void open_group() {
    group_ = la_->key;
    stock_buf_.clear();
    while (la_ && la_->key == group_ && la_->tag == SourceTag::Stock) {
      stock_buf_.push_back(std::get<StockRecord>(std::move(la_->record)));
      advance();
    }
    if (counters_)
      counters_->group_buffer_peak =
          std::max<std::uint64_t>(counters_->group_buffer_peak, stock_buf_.size());
    group_orderlines_ = 0;
    in_group_ = true;
  }

  void step_group() {
    if (la_ && la_->key == group_) {
      OrderlineRecord ol = std::get<OrderlineRecord>(std::move(la_->record));
      advance();
      ++group_orderlines_;
      join_detail::emit_orderline(jt_, group_, std::move(ol), stock_buf_, out_);
      return;
    }
    join_detail::emit_group_end(jt_, group_, stock_buf_, group_orderlines_, out_);
    in_group_ = false;
  }

  JoinType jt_;
  IncludedColumnsPolicy policy_;
  std::unique_ptr<Cursor> cursor_;
  MetricsCounters* counters_;
  bool started_ = false;
  bool in_group_ = false;
  std::optional<MergedEntryView> la_;
  JoinKey group_{};
  std::vector<StockRecord> stock_buf_;
  std::uint64_t group_orderlines_ = 0;
  std::deque<JoinRow> out_;
};

}  // namespace

MergedIndex::MergedIndex(Backend backend, IncludedColumnsPolicy policy,
                         std::shared_ptr<BufferPool> pool, LsmOptions lsm_options)
    : policy_(policy),
      store_(make_store(backend, "merged", std::move(pool), lsm_options)) {}

void MergedIndex::insert(const StockRecord& s) {
  store_->put(merged_key(s), stock_payload(s, policy_));
}

void MergedIndex::insert(const OrderlineRecord& o) {
  store_->put(merged_key(o), orderline_payload(o, policy_));
}

void MergedIndex::update(const StockRecord& old_s, const StockRecord& new_s) {
  EncodedKey old_key = merged_key(old_s);
  EncodedKey new_key = merged_key(new_s);
  if (old_key == new_key) {
    if (!store_->replace(new_key, stock_payload(new_s, policy_)))
      throw IntegrityError("merged: update of missing stock row");
    return;
  }
  store_->erase(old_key);
  store_->put(new_key, stock_payload(new_s, policy_));
}

void MergedIndex::update(const OrderlineRecord& old_o, const OrderlineRecord& new_o) {
  EncodedKey old_key = merged_key(old_o);
  EncodedKey new_key = merged_key(new_o);
  if (old_key == new_key) {
    if (!store_->replace(new_key, orderline_payload(new_o, policy_)))
      throw IntegrityError("merged: update of missing orderline row");
    return;
  }
  store_->erase(old_key);
  store_->put(new_key, orderline_payload(new_o, policy_));
}

void MergedIndex::erase(const StockRecord& s) { store_->erase(merged_key(s)); }

void MergedIndex::erase(const OrderlineRecord& o) { store_->erase(merged_key(o)); }

void MergedIndex::apply(const Delta& d) {
  d.validate();
  if (d.table == SourceTag::Stock) {
    switch (d.kind) {
      case DeltaKind::Insert: insert(std::get<StockRecord>(*d.new_image)); break;
      case DeltaKind::Delete: erase(std::get<StockRecord>(*d.old_image)); break;
      case DeltaKind::Update:
        update(std::get<StockRecord>(*d.old_image), std::get<StockRecord>(*d.new_image));
        break;
    }
  } else {
    switch (d.kind) {
      case DeltaKind::Insert: insert(std::get<OrderlineRecord>(*d.new_image)); break;
      case DeltaKind::Delete: erase(std::get<OrderlineRecord>(*d.old_image)); break;
      case DeltaKind::Update:
        update(std::get<OrderlineRecord>(*d.old_image),
               std::get<OrderlineRecord>(*d.new_image));
        break;
    }
  }
}

std::optional<StockRecord> MergedIndex::get_stock(std::uint32_t w, std::uint32_t i) {
  auto payload = store_->get(merged_stock_key(w, i));
  if (!payload) return std::nullopt;
  return decode_stock(w, i, *payload, policy_);
}

std::optional<OrderlineRecord> MergedIndex::get_orderline(std::uint32_t w, std::uint32_t i,
                                                          std::uint32_t d, std::uint32_t o,
                                                          std::uint32_t l) {
  OrderlineRecord probe;
  probe.warehouse_id = w;
  probe.district_id = d;
  probe.order_id = o;
  probe.line_number = l;
  probe.item_id = i;
  auto payload = store_->get(merged_orderline_key(probe));
  if (!payload) return std::nullopt;
  return decode_orderline(w, d, o, l, i, *payload, policy_);
}

std::unique_ptr<JoinStream> MergedIndex::join_all(JoinType jt) {
  return std::make_unique<MergedJoinStream>(jt, policy_, store_->scan_all(),
                                            &store_->counters());
}

std::unique_ptr<JoinStream> MergedIndex::join_warehouse(JoinType jt, std::uint32_t w) {
  return std::make_unique<MergedJoinStream>(jt, policy_,
                                            store_->scan_prefix(warehouse_prefix(w)),
                                            &store_->counters());
}

std::unique_ptr<JoinStream> MergedIndex::join_key(JoinType jt, std::uint32_t w,
                                                  std::uint32_t i) {
  return std::make_unique<MergedJoinStream>(jt, policy_,
                                            store_->scan_prefix(join_key_prefix(w, i)),
                                            &store_->counters());
}

std::vector<StockRecord> MergedIndex::extract_stock() {
  std::vector<StockRecord> out;
  auto cur = store_->scan_all();
  while (auto entry = cur->next()) {
    MergedEntryView view = parse_merged_entry(entry->key, entry->value, policy_);
    if (view.tag == SourceTag::Stock)
      out.push_back(std::get<StockRecord>(std::move(view.record)));
  }
  return out;
}

std::vector<OrderlineRecord> MergedIndex::extract_orderlines() {
  std::vector<OrderlineRecord> out;
  auto cur = store_->scan_all();
  while (auto entry = cur->next()) {
    MergedEntryView view = parse_merged_entry(entry->key, entry->value, policy_);
    if (view.tag == SourceTag::Orderline)
      out.push_back(std::get<OrderlineRecord>(std::move(view.record)));
  }
  return out;
}

void MergedIndex::bulk_load(const std::vector<StockRecord>& stock,
                            const std::vector<OrderlineRecord>& orderlines) {
  std::vector<Entry> batch;
  batch.reserve(stock.size() + orderlines.size());
  for (const StockRecord& s : stock)
    batch.push_back({merged_key(s), stock_payload(s, policy_)});
  for (const OrderlineRecord& o : orderlines)
    batch.push_back({merged_key(o), orderline_payload(o, policy_)});
  store_->bulk_load(std::move(batch));
}

void MergedIndex::compact() {
  if (store_->backend() == Backend::Lsm) store_->compact();
}

}  // namespace midx
