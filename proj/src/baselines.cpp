#include "midx/baselines.hpp"

#include <algorithm>
#include <deque>

#include "midx/errors.hpp"

namespace midx {

// ---- traditional twin indexes ----------------------------------------------

TraditionalIndexes::TraditionalIndexes(Backend backend, IncludedColumnsPolicy policy,
                                       std::shared_ptr<BufferPool> pool,
                                       LsmOptions lsm_options)
    : policy_(policy),
      stock_store_(make_store(backend, "stock_index", pool, lsm_options)),
      orderline_store_(make_store(backend, "orderline_index", pool, lsm_options)) {}

void TraditionalIndexes::insert(const StockRecord& s) {
  stock_store_->put(stock_index_key(s.warehouse_id, s.item_id), stock_payload(s, policy_));
}

void TraditionalIndexes::insert(const OrderlineRecord& o) {
  orderline_store_->put(orderline_index_key(o), orderline_payload(o, policy_));
}

void TraditionalIndexes::update(const StockRecord& old_s, const StockRecord& new_s) {
  EncodedKey old_key = stock_index_key(old_s.warehouse_id, old_s.item_id);
  EncodedKey new_key = stock_index_key(new_s.warehouse_id, new_s.item_id);
  if (old_key == new_key) {
    if (!stock_store_->replace(new_key, stock_payload(new_s, policy_)))
      throw IntegrityError("stock_index: update of missing row");
    return;
  }
  stock_store_->erase(old_key);
  stock_store_->put(new_key, stock_payload(new_s, policy_));
}

void TraditionalIndexes::update(const OrderlineRecord& old_o, const OrderlineRecord& new_o) {
  EncodedKey old_key = orderline_index_key(old_o);
  EncodedKey new_key = orderline_index_key(new_o);
  if (old_key == new_key) {
    if (!orderline_store_->replace(new_key, orderline_payload(new_o, policy_)))
      throw IntegrityError("orderline_index: update of missing row");
    return;
  }
  orderline_store_->erase(old_key);
  orderline_store_->put(new_key, orderline_payload(new_o, policy_));
}

void TraditionalIndexes::erase(const StockRecord& s) {
  stock_store_->erase(stock_index_key(s.warehouse_id, s.item_id));
}

void TraditionalIndexes::erase(const OrderlineRecord& o) {
  orderline_store_->erase(orderline_index_key(o));
}

void TraditionalIndexes::apply(const Delta& d) {
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

std::optional<StockRecord> TraditionalIndexes::get_stock(std::uint32_t w, std::uint32_t i) {
  auto payload = stock_store_->get(stock_index_key(w, i));
  if (!payload) return std::nullopt;
  return decode_stock(w, i, *payload, policy_);
}

std::optional<OrderlineRecord> TraditionalIndexes::get_orderline(std::uint32_t w,
                                                                 std::uint32_t i,
                                                                 std::uint32_t d,
                                                                 std::uint32_t o,
                                                                 std::uint32_t l) {
  auto payload = orderline_store_->get(orderline_index_key(w, i, d, o, l));
  if (!payload) return std::nullopt;
  return decode_orderline(w, d, o, l, i, *payload, policy_);
}

std::unique_ptr<JoinStream> TraditionalIndexes::join_range(JoinType jt,
                                                           const EncodedKey& stock_prefix,
                                                           const EncodedKey& ol_prefix) {
  std::shared_ptr<Cursor> sc{stock_store_->scan_prefix(stock_prefix)};
  std::shared_ptr<Cursor> oc{orderline_store_->scan_prefix(ol_prefix)};
  IncludedColumnsPolicy p = policy_;
  StockSource stock = [sc, p]() -> std::optional<StockRecord> {
    auto e = sc->next();
    if (!e) return std::nullopt;
    return parse_stock_index_entry(e->key, e->value, p);
  };
  OrderlineSource lines = [oc, p]() -> std::optional<OrderlineRecord> {
    auto e = oc->next();
    if (!e) return std::nullopt;
    return parse_orderline_index_entry(e->key, e->value, p);
  };
  return make_group_join(jt, std::move(stock), std::move(lines), &extra_);
}

std::unique_ptr<JoinStream> TraditionalIndexes::join_all(JoinType jt) {
  return join_range(jt, EncodedKey{}, EncodedKey{});
}

std::unique_ptr<JoinStream> TraditionalIndexes::join_warehouse(JoinType jt,
                                                               std::uint32_t w) {
  return join_range(jt, warehouse_prefix(w), warehouse_prefix(w));
}

std::unique_ptr<JoinStream> TraditionalIndexes::join_key(JoinType jt, std::uint32_t w,
                                                         std::uint32_t i) {
  return join_range(jt, join_key_prefix(w, i), join_key_prefix(w, i));
}

std::vector<StockRecord> TraditionalIndexes::extract_stock() {
  std::vector<StockRecord> out;
  auto cur = stock_store_->scan_all();
  while (auto e = cur->next())
    out.push_back(parse_stock_index_entry(e->key, e->value, policy_));
  return out;
}

std::vector<OrderlineRecord> TraditionalIndexes::extract_orderlines() {
  std::vector<OrderlineRecord> out;
  auto cur = orderline_store_->scan_all();
  while (auto e = cur->next())
    out.push_back(parse_orderline_index_entry(e->key, e->value, policy_));
  return out;
}

void TraditionalIndexes::bulk_load(const std::vector<StockRecord>& stock,
                                   const std::vector<OrderlineRecord>& orderlines) {
  std::vector<Entry> sb;
  sb.reserve(stock.size());
  for (const StockRecord& s : stock)
    sb.push_back({stock_index_key(s.warehouse_id, s.item_id), stock_payload(s, policy_)});
  stock_store_->bulk_load(std::move(sb));
  std::vector<Entry> ob;
  ob.reserve(orderlines.size());
  for (const OrderlineRecord& o : orderlines)
    ob.push_back({orderline_index_key(o), orderline_payload(o, policy_)});
  orderline_store_->bulk_load(std::move(ob));
}

void TraditionalIndexes::compact() {
  if (stock_store_->backend() == Backend::Lsm) {
    stock_store_->compact();
    orderline_store_->compact();
  }
}

std::vector<OrderedStore*> TraditionalIndexes::stores() {
  return {stock_store_.get(), orderline_store_.get()};
}

// ---- materialized join view -------------------------------------------------

namespace {

constexpr char kNoStock = '\x00';
constexpr char kHasStock = '\x01';

EncodedKey view_pad_key(std::uint32_t w, std::uint32_t i) {
  return encode_key({std::int64_t(w), std::int64_t(i), SourceTag::Stock});
}

EncodedKey view_line_key(std::uint32_t w, std::uint32_t i, std::uint32_t d,
                         std::uint32_t o, std::uint32_t l) {
  return encode_key({std::int64_t(w), std::int64_t(i), SourceTag::Orderline,
                     std::int64_t(d), std::int64_t(o), std::int64_t(l)});
}

std::string pack_line_value(const std::optional<std::string>& stock_bytes,
                            std::string_view line_bytes) {
  std::string v;
  if (stock_bytes) {
    if (stock_bytes->size() > 0xFFFF)
      throw EncodingError("view: stock payload too large to embed");
    v.push_back(kHasStock);
    v.push_back(static_cast<char>(stock_bytes->size() >> 8));
    v.push_back(static_cast<char>(stock_bytes->size() & 0xFF));
    v += *stock_bytes;
  } else {
    v.push_back(kNoStock);
  }
  v.append(line_bytes);
  return v;
}

struct LineValue {
  bool stock_present = false;
  std::string stock_bytes;
  std::string line_bytes;
};

LineValue unpack_line_value(std::string_view v) {
  if (v.empty()) throw EncodingError("view: empty line value");
  LineValue out;
  if (v[0] == kHasStock) {
    if (v.size() < 3) throw EncodingError("view: truncated line value");
    std::size_t n = (static_cast<unsigned char>(v[1]) << 8) |
                    static_cast<unsigned char>(v[2]);
    if (v.size() < 3 + n) throw EncodingError("view: truncated stock bytes");
    out.stock_present = true;
    out.stock_bytes.assign(v.substr(3, n));
    out.line_bytes.assign(v.substr(3 + n));
  } else if (v[0] == kNoStock) {
    out.line_bytes.assign(v.substr(1));
  } else {
    throw EncodingError("view: bad presence byte");
  }
  return out;
}

struct ViewKeyParts {
  std::uint32_t w = 0, i = 0;
  bool is_line = false;
  std::uint32_t d = 0, o = 0, l = 0;
};

ViewKeyParts parse_view_key(const EncodedKey& key) {
  ByteReader r(key.bytes);
  ViewKeyParts parts;
  parts.w = r.take_u32();
  parts.i = r.take_u32();
  parts.is_line = r.take_tag() == SourceTag::Orderline;
  if (parts.is_line) {
    parts.d = r.take_u32();
    parts.o = r.take_u32();
    parts.l = r.take_u32();
  }
  if (!r.done()) throw EncodingError("view: trailing key bytes");
  return parts;
}

// Filters rows of a stored view down to the asked join type. Works for any
// stored view that contains the needed row classes.
class ViewJoinStream final : public JoinStream {
 public:
  ViewJoinStream(JoinType jt, IncludedColumnsPolicy policy, std::unique_ptr<Cursor> cursor)
      : jt_(jt), policy_(policy), cursor_(std::move(cursor)) {}

  std::optional<JoinRow> next() override {
    for (;;) {
      auto entry = cursor_->next();
      if (!entry) return std::nullopt;
      ViewKeyParts k = parse_view_key(entry->key);
      JoinKey group{k.w, k.i};
      if (!k.is_line) {
        // Stock-only pad row.
        if (jt_ != JoinType::RightOuter && jt_ != JoinType::FullOuter) continue;
        return JoinRow{group, std::nullopt,
                       decode_stock(k.w, k.i, entry->value, policy_)};
      }
      LineValue v = unpack_line_value(entry->value);
      switch (jt_) {
        case JoinType::Inner:
        case JoinType::RightOuter:
          if (!v.stock_present) continue;
          return matched_row(group, k, v);
        case JoinType::LeftOuter:
        case JoinType::FullOuter:
          if (v.stock_present) return matched_row(group, k, v);
          return JoinRow{group, line_of(k, v), std::nullopt};
        case JoinType::LeftSemi:
          if (!v.stock_present) continue;
          return JoinRow{group, line_of(k, v), std::nullopt};
        case JoinType::RightSemi:
          if (!v.stock_present || last_semi_group_ == group) continue;
          last_semi_group_ = group;
          return JoinRow{group, std::nullopt,
                         decode_stock(k.w, k.i, v.stock_bytes, policy_)};
      }
    }
  }

 private:
  OrderlineRecord line_of(const ViewKeyParts& k, const LineValue& v) const {
    return decode_orderline(k.w, k.d, k.o, k.l, k.i, v.line_bytes, policy_);
  }
  JoinRow matched_row(JoinKey group, const ViewKeyParts& k, const LineValue& v) const {
    return JoinRow{group, line_of(k, v), decode_stock(k.w, k.i, v.stock_bytes, policy_)};
  }

  JoinType jt_;
  IncludedColumnsPolicy policy_;
  std::unique_ptr<Cursor> cursor_;
  std::optional<JoinKey> last_semi_group_;
};

}  // namespace

MaterializedJoinView::MaterializedJoinView(Backend backend, IncludedColumnsPolicy policy,
                                           JoinType stored,
                                           std::shared_ptr<BufferPool> pool,
                                           LsmOptions lsm_options)
    : policy_(policy),
      stored_(stored),
      view_(make_store(backend, "view", pool, lsm_options)),
      stock_support_(make_store(backend, "stock_support", pool, lsm_options)),
      orderline_support_(make_store(backend, "orderline_support", pool, lsm_options)) {
  if (stored != JoinType::Inner && stored != JoinType::FullOuter)
    throw ConfigError("view can be stored as inner or full_outer only");
}

bool MaterializedJoinView::can_answer(JoinType stored, JoinType asked) {
  if (stored == JoinType::FullOuter) return true;
  if (stored == JoinType::Inner)
    return asked == JoinType::Inner || asked == JoinType::LeftSemi ||
           asked == JoinType::RightSemi;
  return stored == asked;
}

MaterializedJoinView::GroupImage MaterializedJoinView::read_group(std::uint32_t w,
                                                                  std::uint32_t i) {
  GroupImage g;
  auto cur = view_->scan_prefix(join_key_prefix(w, i));
  while (auto entry = cur->next()) {
    ViewKeyParts k = parse_view_key(entry->key);
    if (!k.is_line) {
      g.pad = entry->value;
      continue;
    }
    LineValue v = unpack_line_value(entry->value);
    g.lines.push_back({k.d, k.o, k.l, v.stock_present, std::move(v.stock_bytes),
                       std::move(v.line_bytes)});
  }
  return g;
}

void MaterializedJoinView::insert_stock_full(const StockRecord& s) {
  std::string payload = stock_payload(s, policy_);
  stock_support_->put(stock_index_key(s.warehouse_id, s.item_id), payload);
  GroupImage g = read_group(s.warehouse_id, s.item_id);
  if (g.pad) throw IntegrityError("view: stock insert over existing pad row");
  if (g.lines.empty()) {
    view_->put(view_pad_key(s.warehouse_id, s.item_id), payload);
    return;
  }
  for (const ViewLine& line : g.lines) {
    if (line.stock_present)
      throw IntegrityError("view: stock insert but line already has stock");
    view_->replace(view_line_key(s.warehouse_id, s.item_id, line.d, line.o, line.l),
                   pack_line_value(payload, line.line_bytes));
  }
}

void MaterializedJoinView::insert_stock_inner(const StockRecord& s) {
  std::string payload = stock_payload(s, policy_);
  stock_support_->put(stock_index_key(s.warehouse_id, s.item_id), payload);
  auto cur = orderline_support_->scan_prefix(join_key_prefix(s.warehouse_id, s.item_id));
  while (auto entry = cur->next()) {
    OrderlineRecord o = parse_orderline_index_entry(entry->key, entry->value, policy_);
    view_->put(view_line_key(o.warehouse_id, o.item_id, o.district_id, o.order_id,
                             o.line_number),
               pack_line_value(payload, entry->value));
  }
}

void MaterializedJoinView::erase_stock_full(const StockRecord& s) {
  stock_support_->erase(stock_index_key(s.warehouse_id, s.item_id));
  GroupImage g = read_group(s.warehouse_id, s.item_id);
  if (g.pad) {
    if (!g.lines.empty())
      throw IntegrityError("view: pad row coexists with line rows");
    view_->erase(view_pad_key(s.warehouse_id, s.item_id));
    return;
  }
  if (g.lines.empty()) throw IntegrityError("view: stock delete but group not in view");
  for (const ViewLine& line : g.lines) {
    if (!line.stock_present)
      throw IntegrityError("view: stock delete but line has no stock");
    view_->replace(view_line_key(s.warehouse_id, s.item_id, line.d, line.o, line.l),
                   pack_line_value(std::nullopt, line.line_bytes));
  }
}

void MaterializedJoinView::erase_stock_inner(const StockRecord& s) {
  stock_support_->erase(stock_index_key(s.warehouse_id, s.item_id));
  GroupImage g = read_group(s.warehouse_id, s.item_id);
  for (const ViewLine& line : g.lines)
    view_->erase(view_line_key(s.warehouse_id, s.item_id, line.d, line.o, line.l));
}

void MaterializedJoinView::replace_stock_payload(const StockRecord& s) {
  std::string payload = stock_payload(s, policy_);
  if (!stock_support_->replace(stock_index_key(s.warehouse_id, s.item_id), payload))
    throw IntegrityError("stock_support: update of missing row");
  GroupImage g = read_group(s.warehouse_id, s.item_id);
  if (g.pad) {
    view_->replace(view_pad_key(s.warehouse_id, s.item_id), payload);
    return;
  }
  if (g.lines.empty()) {
    if (stored_ == JoinType::FullOuter)
      throw IntegrityError("view: stock update but group not in view");
    return;  // stock without matches is absent from an inner view
  }
  for (const ViewLine& line : g.lines) {
    if (!line.stock_present)
      throw IntegrityError("view: stock update but line has no stock");
    view_->replace(view_line_key(s.warehouse_id, s.item_id, line.d, line.o, line.l),
                   pack_line_value(payload, line.line_bytes));
  }
}

void MaterializedJoinView::insert_line(const OrderlineRecord& o) {
  std::string payload = orderline_payload(o, policy_);
  orderline_support_->put(orderline_index_key(o), payload);
  EncodedKey line_key =
      view_line_key(o.warehouse_id, o.item_id, o.district_id, o.order_id, o.line_number);
  if (stored_ == JoinType::Inner) {
    auto stock = stock_support_->get(stock_index_key(o.warehouse_id, o.item_id));
    if (stock) view_->put(line_key, pack_line_value(*stock, payload));
    return;
  }
  GroupImage g = read_group(o.warehouse_id, o.item_id);
  std::optional<std::string> stock_bytes;
  if (g.pad) {
    stock_bytes = std::move(*g.pad);
    view_->erase(view_pad_key(o.warehouse_id, o.item_id));
  } else if (!g.lines.empty() && g.lines.front().stock_present) {
    stock_bytes = g.lines.front().stock_bytes;
  }
  view_->put(line_key, pack_line_value(stock_bytes, payload));
}

void MaterializedJoinView::erase_line(const OrderlineRecord& o) {
  orderline_support_->erase(orderline_index_key(o));
  EncodedKey line_key =
      view_line_key(o.warehouse_id, o.item_id, o.district_id, o.order_id, o.line_number);
  if (stored_ == JoinType::Inner) {
    view_->erase(line_key);
    return;
  }
  GroupImage g = read_group(o.warehouse_id, o.item_id);
  const ViewLine* victim = nullptr;
  for (const ViewLine& line : g.lines)
    if (line.d == o.district_id && line.o == o.order_id && line.l == o.line_number)
      victim = &line;
  if (!victim) throw IntegrityError("view: orderline delete but row not in view");
  bool last_line = g.lines.size() == 1;
  view_->erase(line_key);
  if (last_line && victim->stock_present)
    view_->put(view_pad_key(o.warehouse_id, o.item_id), victim->stock_bytes);
}

void MaterializedJoinView::replace_line_payload(const OrderlineRecord& o) {
  std::string payload = orderline_payload(o, policy_);
  if (!orderline_support_->replace(orderline_index_key(o), payload))
    throw IntegrityError("orderline_support: update of missing row");
  EncodedKey line_key =
      view_line_key(o.warehouse_id, o.item_id, o.district_id, o.order_id, o.line_number);
  auto existing = view_->get(line_key);
  if (!existing) {
    if (stored_ == JoinType::FullOuter)
      throw IntegrityError("view: orderline update but row not in view");
    return;  // dangling line is absent from an inner view
  }
  LineValue v = unpack_line_value(*existing);
  std::optional<std::string> stock_bytes;
  if (v.stock_present) stock_bytes = std::move(v.stock_bytes);
  view_->replace(line_key, pack_line_value(stock_bytes, payload));
}

void MaterializedJoinView::insert(const StockRecord& s) {
  if (stored_ == JoinType::FullOuter)
    insert_stock_full(s);
  else
    insert_stock_inner(s);
}

void MaterializedJoinView::insert(const OrderlineRecord& o) { insert_line(o); }

void MaterializedJoinView::update(const StockRecord& old_s, const StockRecord& new_s) {
  if (old_s.warehouse_id == new_s.warehouse_id && old_s.item_id == new_s.item_id) {
    replace_stock_payload(new_s);
    return;
  }
  erase(old_s);
  insert(new_s);
}

void MaterializedJoinView::update(const OrderlineRecord& old_o,
                                  const OrderlineRecord& new_o) {
  bool same_key = old_o.warehouse_id == new_o.warehouse_id &&
                  old_o.item_id == new_o.item_id &&
                  old_o.district_id == new_o.district_id &&
                  old_o.order_id == new_o.order_id &&
                  old_o.line_number == new_o.line_number;
  if (same_key) {
    replace_line_payload(new_o);
    return;
  }
  erase(old_o);
  insert(new_o);
}

void MaterializedJoinView::erase(const StockRecord& s) {
  if (stored_ == JoinType::FullOuter)
    erase_stock_full(s);
  else
    erase_stock_inner(s);
}

void MaterializedJoinView::erase(const OrderlineRecord& o) { erase_line(o); }

void MaterializedJoinView::apply(const Delta& d) {
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

std::optional<StockRecord> MaterializedJoinView::get_stock(std::uint32_t w,
                                                           std::uint32_t i) {
  auto payload = stock_support_->get(stock_index_key(w, i));
  if (!payload) return std::nullopt;
  return decode_stock(w, i, *payload, policy_);
}

std::optional<OrderlineRecord> MaterializedJoinView::get_orderline(std::uint32_t w,
                                                                   std::uint32_t i,
                                                                   std::uint32_t d,
                                                                   std::uint32_t o,
                                                                   std::uint32_t l) {
  auto payload = orderline_support_->get(orderline_index_key(w, i, d, o, l));
  if (!payload) return std::nullopt;
  return decode_orderline(w, d, o, l, i, *payload, policy_);
}

std::unique_ptr<JoinStream> MaterializedJoinView::join_all(JoinType jt) {
  if (!can_answer(stored_, jt))
    throw UnsupportedError("stored view cannot answer this join type");
  return std::make_unique<ViewJoinStream>(jt, policy_, view_->scan_all());
}

std::unique_ptr<JoinStream> MaterializedJoinView::join_warehouse(JoinType jt,
                                                                 std::uint32_t w) {
  if (!can_answer(stored_, jt))
    throw UnsupportedError("stored view cannot answer this join type");
  return std::make_unique<ViewJoinStream>(jt, policy_,
                                          view_->scan_prefix(warehouse_prefix(w)));
}

std::unique_ptr<JoinStream> MaterializedJoinView::join_key(JoinType jt, std::uint32_t w,
                                                           std::uint32_t i) {
  if (!can_answer(stored_, jt))
    throw UnsupportedError("stored view cannot answer this join type");
  return std::make_unique<ViewJoinStream>(jt, policy_,
                                          view_->scan_prefix(join_key_prefix(w, i)));
}

std::vector<StockRecord> MaterializedJoinView::extract_stock() {
  std::vector<StockRecord> out;
  auto cur = stock_support_->scan_all();
  while (auto e = cur->next())
    out.push_back(parse_stock_index_entry(e->key, e->value, policy_));
  return out;
}

std::vector<OrderlineRecord> MaterializedJoinView::extract_orderlines() {
  std::vector<OrderlineRecord> out;
  auto cur = orderline_support_->scan_all();
  while (auto e = cur->next())
    out.push_back(parse_orderline_index_entry(e->key, e->value, policy_));
  return out;
}

void MaterializedJoinView::bulk_load(const std::vector<StockRecord>& stock,
                                     const std::vector<OrderlineRecord>& orderlines) {
  std::vector<Entry> sb;
  sb.reserve(stock.size());
  for (const StockRecord& s : stock)
    sb.push_back({stock_index_key(s.warehouse_id, s.item_id), stock_payload(s, policy_)});
  stock_support_->bulk_load(std::move(sb));

  std::vector<Entry> ob;
  ob.reserve(orderlines.size());
  for (const OrderlineRecord& o : orderlines)
    ob.push_back({orderline_index_key(o), orderline_payload(o, policy_)});
  orderline_support_->bulk_load(std::move(ob));

  // Group-wise merge of both inputs to derive the view rows. Duplicate keys
  // keep the last occurrence, mirroring the store's bulk contract.
  std::vector<const StockRecord*> ss;
  ss.reserve(stock.size());
  for (const StockRecord& s : stock) ss.push_back(&s);
  std::stable_sort(ss.begin(), ss.end(), [](const StockRecord* a, const StockRecord* b) {
    return std::tuple{a->warehouse_id, a->item_id} < std::tuple{b->warehouse_id, b->item_id};
  });
  std::vector<const OrderlineRecord*> os;
  os.reserve(orderlines.size());
  for (const OrderlineRecord& o : orderlines) os.push_back(&o);
  std::stable_sort(os.begin(), os.end(),
                   [](const OrderlineRecord* a, const OrderlineRecord* b) {
                     return std::tuple{a->warehouse_id, a->item_id, a->district_id,
                                       a->order_id, a->line_number} <
                            std::tuple{b->warehouse_id, b->item_id, b->district_id,
                                       b->order_id, b->line_number};
                   });
  auto dedupe_stock = [](std::vector<const StockRecord*>& v) {
    std::vector<const StockRecord*> out;
    for (const StockRecord* s : v) {
      if (!out.empty() && join_key_of(*out.back()) == join_key_of(*s))
        out.back() = s;
      else
        out.push_back(s);
    }
    v = std::move(out);
  };
  auto dedupe_lines = [](std::vector<const OrderlineRecord*>& v) {
    std::vector<const OrderlineRecord*> out;
    auto pk = [](const OrderlineRecord* o) {
      return std::tuple{o->warehouse_id, o->item_id, o->district_id, o->order_id,
                        o->line_number};
    };
    for (const OrderlineRecord* o : v) {
      if (!out.empty() && pk(out.back()) == pk(o))
        out.back() = o;
      else
        out.push_back(o);
    }
    v = std::move(out);
  };
  dedupe_stock(ss);
  dedupe_lines(os);

  std::vector<Entry> vb;
  std::size_t si = 0, oi = 0;
  while (si < ss.size() || oi < os.size()) {
    JoinKey next{UINT32_MAX, UINT32_MAX};
    if (si < ss.size()) next = std::min(next, join_key_of(*ss[si]));
    if (oi < os.size()) next = std::min(next, join_key_of(*os[oi]));
    std::optional<std::string> stock_bytes;
    if (si < ss.size() && join_key_of(*ss[si]) == next) {
      stock_bytes = stock_payload(*ss[si], policy_);
      ++si;
    }
    bool any_line = false;
    while (oi < os.size() && join_key_of(*os[oi]) == next) {
      const OrderlineRecord& o = *os[oi];
      if (stored_ == JoinType::FullOuter || stock_bytes)
        vb.push_back({view_line_key(o.warehouse_id, o.item_id, o.district_id, o.order_id,
                                    o.line_number),
                      pack_line_value(stock_bytes, orderline_payload(o, policy_))});
      any_line = true;
      ++oi;
    }
    if (stock_bytes && !any_line && stored_ == JoinType::FullOuter)
      vb.push_back({view_pad_key(next.warehouse_id, next.item_id), *stock_bytes});
  }
  view_->bulk_load(std::move(vb));
}

void MaterializedJoinView::compact() {
  if (view_->backend() == Backend::Lsm) {
    view_->compact();
    stock_support_->compact();
    orderline_support_->compact();
  }
}

std::vector<OrderedStore*> MaterializedJoinView::stores() {
  return {view_.get(), stock_support_.get(), orderline_support_.get()};
}

}  // namespace midx
