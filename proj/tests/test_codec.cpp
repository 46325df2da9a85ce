#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "midx/codec.hpp"
#include "midx/schema.hpp"
#include "midx/workload.hpp"

using namespace midx;

namespace {

std::string bytes_of(std::initializer_list<unsigned char> bs) {
  return std::string(bs.begin(), bs.end());
}

// Random text over a tiny alphabet that includes the escaped bytes.
std::string random_text(Rng& rng, std::size_t max_len) {
  static const char alphabet[] = {'\x00', '\x01', '\x02', 'a', 'b', '\x7f', '\xff'};
  std::string s;
  std::size_t len = rng.uniform(0, static_cast<std::uint32_t>(max_len));
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.uniform(0, 6)]);
  return s;
}

}  // namespace

TEST_CASE("u32 components are big-endian and order-preserving") {
  std::string out;
  put_u32(out, 0x01020304u);
  CHECK(out == bytes_of({0x01, 0x02, 0x03, 0x04}));

  out.clear();
  put_u32(out, 0);
  CHECK(out == bytes_of({0, 0, 0, 0}));

  out.clear();
  put_u32(out, 0xFFFFFFFFu);
  CHECK(out == bytes_of({0xFF, 0xFF, 0xFF, 0xFF}));

  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::uint32_t a = static_cast<std::uint32_t>(rng.next_u64());
    std::uint32_t b = static_cast<std::uint32_t>(rng.next_u64());
    std::string ea, eb;
    put_u32(ea, a);
    put_u32(eb, b);
    CHECK((a < b) == (ea < eb));
  }
}

TEST_CASE("text components escape zero bytes and terminate with 0x00 0x00") {
  std::string out;
  put_text(out, std::string("a\0b", 3));
  CHECK(out == bytes_of({'a', 0x00, 0x01, 'b', 0x00, 0x00}));

  out.clear();
  put_text(out, "");
  CHECK(out == bytes_of({0x00, 0x00}));

  ByteReader r(out);
  CHECK(r.take_text() == "");
  CHECK(r.done());
}

TEST_CASE("tag byte keeps stock ahead of orderline") {
  std::string s, o;
  put_tag(s, SourceTag::Stock);
  put_tag(o, SourceTag::Orderline);
  CHECK(s == bytes_of({0x00}));
  CHECK(o == bytes_of({0x01}));
  CHECK(s < o);
}

TEST_CASE("encode then decode round-trips random component vectors") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    std::vector<KeyComponent> comps;
    std::vector<ComponentKind> kinds;
    std::size_t n = rng.uniform(1, 5);
    for (std::size_t k = 0; k < n; ++k) {
      switch (rng.uniform(0, 2)) {
        case 0:
          comps.emplace_back(std::int64_t(rng.next_u64() & 0xFFFFFFFFull));
          kinds.push_back(ComponentKind::U32);
          break;
        case 1:
          comps.emplace_back(random_text(rng, 12));
          kinds.push_back(ComponentKind::Text);
          break;
        default:
          comps.emplace_back(rng.uniform(0, 1) ? SourceTag::Orderline : SourceTag::Stock);
          kinds.push_back(ComponentKind::Tag);
          break;
      }
    }
    EncodedKey key = encode_key(comps);
    std::vector<KeyComponent> back = decode_key(key, kinds);
    REQUIRE(back.size() == comps.size());
    for (std::size_t k = 0; k < n; ++k) CHECK(back[k] == comps[k]);
  }
}

TEST_CASE("byte order of encoded keys equals componentwise order") {
  // Oracle: std::tuple's lexicographic comparison over the raw values.
  using Probe = std::tuple<std::uint32_t, std::string, std::uint8_t, std::uint32_t>;
  Rng rng(11);
  auto random_probe = [&] {
    return Probe{rng.uniform(0, 5), random_text(rng, 6), rng.uniform(0, 1),
                 rng.uniform(0, 1000000)};
  };
  auto encode = [](const Probe& p) {
    return encode_key({std::int64_t(std::get<0>(p)), std::get<1>(p),
                       static_cast<SourceTag>(std::get<2>(p)),
                       std::int64_t(std::get<3>(p))});
  };
  for (int i = 0; i < 4000; ++i) {
    Probe a = random_probe();
    Probe b = random_probe();
    EncodedKey ea = encode(a);
    EncodedKey eb = encode(b);
    CHECK((a < b) == (ea < eb));
    CHECK((a == b) == (ea == eb));
  }
}

TEST_CASE("text prefixes sort before their extensions regardless of bytes") {
  auto k = [](std::string t) { return encode_key({std::move(t)}); };
  CHECK(k("ab") < k(std::string("ab\0", 3)));
  CHECK(k(std::string("ab\0", 3)) < k("abc"));
  CHECK(k("") < k(std::string("\0", 1)));
}

TEST_CASE("encode_key rejects out-of-range values") {
  CHECK_THROWS_AS(encode_key({std::int64_t(-1)}), EncodingError);
  CHECK_THROWS_AS(encode_key({std::int64_t(0x100000000ll)}), EncodingError);
  CHECK_THROWS_AS(encode_key({std::string(kMaxTextComponent + 1, 'x')}), EncodingError);
  CHECK_NOTHROW(encode_key({std::string(kMaxTextComponent, 'x')}));
}

TEST_CASE("decode errors on truncated or trailing bytes") {
  EncodedKey key = encode_key({std::int64_t(9), std::string("hi")});
  const ComponentKind layout[] = {ComponentKind::U32, ComponentKind::Text};

  EncodedKey truncated{key.bytes.substr(0, key.bytes.size() - 1)};
  CHECK_THROWS_AS(decode_key(truncated, layout), EncodingError);

  EncodedKey trailing{key.bytes + '\x07'};
  CHECK_THROWS_AS(decode_key(trailing, layout), EncodingError);

  const ComponentKind tag_layout[] = {ComponentKind::Tag};
  EncodedKey bad_tag{bytes_of({0x02})};
  CHECK_THROWS_AS(decode_key(bad_tag, tag_layout), EncodingError);

  EncodedKey bad_escape{bytes_of({0x00, 0x05, 0x00, 0x00})};
  const ComponentKind text_layout[] = {ComponentKind::Text};
  CHECK_THROWS_AS(decode_key(bad_escape, text_layout), EncodingError);
}

TEST_CASE("prefix_upper_bound brackets exactly the prefixed keys") {
  CHECK(prefix_upper_bound("abc") == "abd");
  CHECK(prefix_upper_bound(std::string("a\xff", 2)) == "b");
  CHECK(prefix_upper_bound(std::string("\xff\xff", 2)).empty());
  CHECK(prefix_upper_bound("").empty());

  Rng rng(13);
  for (int i = 0; i < 4000; ++i) {
    std::string p = random_text(rng, 4);
    std::string k = random_text(rng, 6);
    std::string ub = prefix_upper_bound(p);
    bool prefixed = k.size() >= p.size() && k.compare(0, p.size(), p) == 0;
    bool in_range = k >= p && (ub.empty() || k < ub);
    CHECK(prefixed == in_range);
  }
}

TEST_CASE("record payloads round-trip under every policy") {
  Rng rng(17);
  WorkloadConfig wc;
  wc.warehouses = 1;
  wc.items = 40;
  wc.orderlines_per_warehouse = 120;
  WorkloadGenerator gen(wc);
  BaseTables t = gen.generate();

  for (IncludedColumnsPolicy p : {IncludedColumnsPolicy::All, IncludedColumnsPolicy::Covering,
                                  IncludedColumnsPolicy::Keys}) {
    for (const StockRecord& s : t.stock) {
      std::string payload = stock_payload(s, p);
      if (p == IncludedColumnsPolicy::Keys) CHECK(payload.empty());
      StockRecord back = decode_stock(s.warehouse_id, s.item_id, payload, p);
      CHECK(back == project(s, p));
      CHECK(back.warehouse_id == s.warehouse_id);
      CHECK(back.item_id == s.item_id);
    }
    for (const OrderlineRecord& o : t.orderlines) {
      std::string payload = orderline_payload(o, p);
      if (p == IncludedColumnsPolicy::Keys) CHECK(payload.empty());
      OrderlineRecord back = decode_orderline(o.warehouse_id, o.district_id, o.order_id,
                                              o.line_number, o.item_id, payload, p);
      CHECK(back == project(o, p));
    }
  }

  // Projection is idempotent.
  const StockRecord& s = t.stock.front();
  CHECK(project(project(s, IncludedColumnsPolicy::Covering), IncludedColumnsPolicy::Covering) ==
        project(s, IncludedColumnsPolicy::Covering));
}

TEST_CASE("payload encoding enforces field widths") {
  StockRecord s;
  s.warehouse_id = 1;
  s.item_id = 1;
  s.data = std::string(kStockDataChars + 1, 'z');
  CHECK_THROWS_AS(stock_payload(s, IncludedColumnsPolicy::Covering), EncodingError);

  s.data = "ok";
  s.district_info[3] = std::string(kDistInfoChars - 1, 'q');  // wrong width
  CHECK_THROWS_AS(stock_payload(s, IncludedColumnsPolicy::All), EncodingError);

  OrderlineRecord o;
  o.warehouse_id = 1;
  o.district_id = 1;
  o.order_id = 1;
  o.line_number = 1;
  o.item_id = 1;
  o.dist_info = "short";
  CHECK_THROWS_AS(orderline_payload(o, IncludedColumnsPolicy::All), EncodingError);
}

TEST_CASE("merged keys group by join key with stock first") {
  OrderlineRecord o;
  o.warehouse_id = 3;
  o.district_id = 2;
  o.order_id = 9;
  o.line_number = 1;
  o.item_id = 5;

  EncodedKey stock_key = merged_stock_key(3, 5);
  EncodedKey line_key = merged_orderline_key(o);
  CHECK(stock_key < line_key);

  // Every key of group (3,5) sorts inside [prefix, next prefix).
  EncodedKey prefix = join_key_prefix(3, 5);
  EncodedKey next_prefix = join_key_prefix(3, 6);
  CHECK(prefix.bytes == stock_key.bytes.substr(0, prefix.bytes.size()));
  CHECK(prefix.bytes == line_key.bytes.substr(0, prefix.bytes.size()));
  CHECK(line_key < next_prefix);

  EncodedKey w_prefix = warehouse_prefix(3);
  CHECK(stock_key.bytes.substr(0, w_prefix.bytes.size()) == w_prefix.bytes);
  CHECK(merged_stock_key(4, 0) > line_key);

  // The merged key is its single-table analogue plus exactly one byte.
  CHECK(stock_key.bytes.size() == stock_index_key(3, 5).bytes.size() + 1);
  CHECK(line_key.bytes.size() ==
        orderline_index_key(3, 5, 2, 9, 1).bytes.size() + 1);
}

TEST_CASE("merged entries parse back to their records") {
  StockRecord s;
  s.warehouse_id = 2;
  s.item_id = 7;
  s.quantity = 55;
  s.year_to_date = 100;
  s.order_count = 3;
  s.data = "widget";
  for (auto& di : s.district_info) di = std::string(kDistInfoChars, 'd');

  for (IncludedColumnsPolicy p : {IncludedColumnsPolicy::All, IncludedColumnsPolicy::Covering,
                                  IncludedColumnsPolicy::Keys}) {
    MergedEntryView v = parse_merged_entry(merged_key(s), stock_payload(s, p), p);
    CHECK(v.key == JoinKey{2, 7});
    CHECK(v.tag == SourceTag::Stock);
    CHECK(std::get<StockRecord>(v.record) == project(s, p));
  }

  OrderlineRecord o;
  o.warehouse_id = 2;
  o.district_id = 4;
  o.order_id = 31;
  o.line_number = 2;
  o.item_id = 7;
  o.supply_warehouse_id = 2;
  o.delivery_date = 1234;
  o.quantity = 5;
  o.amount = 999;
  o.dist_info = std::string(kDistInfoChars, 'x');

  MergedEntryView v =
      parse_merged_entry(merged_key(o), orderline_payload(o, IncludedColumnsPolicy::All),
                         IncludedColumnsPolicy::All);
  CHECK(v.tag == SourceTag::Orderline);
  CHECK(std::get<OrderlineRecord>(v.record) == o);

  CHECK(parse_stock_index_entry(stock_index_key(2, 7),
                                stock_payload(s, IncludedColumnsPolicy::All),
                                IncludedColumnsPolicy::All) == s);
  CHECK(parse_orderline_index_entry(orderline_index_key(o),
                                    orderline_payload(o, IncludedColumnsPolicy::All),
                                    IncludedColumnsPolicy::All) == o);
}

TEST_CASE("delta shape validation") {
  StockRecord s;
  s.warehouse_id = 1;
  s.item_id = 1;

  CHECK_NOTHROW(Delta::insert_stock(s).validate());
  CHECK_NOTHROW(Delta::update_stock(s, s).validate());

  Delta broken = Delta::insert_stock(s);
  broken.old_image = AnyRecord(s);  // inserts carry a new image only
  CHECK_THROWS_AS(broken.validate(), ConfigError);

  Delta mismatched = Delta::delete_stock(s);
  OrderlineRecord o;
  o.warehouse_id = 1;
  o.district_id = 1;
  o.order_id = 1;
  o.line_number = 1;
  o.item_id = 1;
  mismatched.old_image = AnyRecord(o);  // wrong table
  CHECK_THROWS_AS(mismatched.validate(), ConfigError);
}
