#include <cmath>
#include <set>

#include "doctest.h"
#include "midx/oracle.hpp"
#include "midx/workload.hpp"

using namespace midx;

namespace {

WorkloadConfig small_config(std::uint64_t seed, double overlap = 0.5) {
  WorkloadConfig wc;
  wc.warehouses = 2;
  wc.items = 50;
  wc.orderlines_per_warehouse = 300;
  wc.stock_overlap = overlap;
  wc.seed = seed;
  return wc;
}

}  // namespace

TEST_CASE("config validation") {
  WorkloadConfig wc = small_config(1);
  CHECK_NOTHROW(wc.validate());

  wc.warehouses = 0;
  CHECK_THROWS_AS(wc.validate(), ConfigError);

  wc = small_config(1);
  wc.stock_overlap = 1.5;
  CHECK_THROWS_AS(wc.validate(), ConfigError);

  wc = small_config(1);
  wc.items = 0;
  CHECK_THROWS_AS(wc.validate(), ConfigError);

  WorkloadGenerator gen(small_config(1));
  CHECK_THROWS_AS(gen.next_new_order(), ConfigError);  // generate() first
  gen.generate();
  CHECK_THROWS_AS(gen.generate(), ConfigError);  // once only
}

TEST_CASE("generation is deterministic per seed and diverges across seeds") {
  WorkloadGenerator a(small_config(77));
  WorkloadGenerator b(small_config(77));
  BaseTables ta = a.generate();
  BaseTables tb = b.generate();
  CHECK(ta.stock == tb.stock);
  CHECK(ta.orderlines == tb.orderlines);
  CHECK(a.point_keys(50) == b.point_keys(50));
  for (int i = 0; i < 3; ++i) {
    auto da = a.next_new_order();
    auto db = b.next_new_order();
    REQUIRE(da.size() == db.size());
    for (std::size_t k = 0; k < da.size(); ++k) {
      CHECK(da[k].kind == db[k].kind);
      CHECK(da[k].new_image == db[k].new_image);
    }
    CHECK(a.next_delivery().size() == b.next_delivery().size());
  }

  WorkloadGenerator c(small_config(78));
  CHECK(c.generate().orderlines != ta.orderlines);
}

TEST_CASE("every warehouse stocks every item exactly once") {
  WorkloadConfig wc = small_config(5);
  WorkloadGenerator gen(wc);
  BaseTables t = gen.generate();

  CHECK(t.stock.size() == std::size_t(wc.warehouses) * wc.items);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const StockRecord& s : t.stock) {
    CHECK(seen.insert({s.warehouse_id, s.item_id}).second);
    CHECK(s.warehouse_id >= 1);
    CHECK(s.warehouse_id <= wc.warehouses);
    CHECK(s.item_id >= 1);
    CHECK(s.item_id <= wc.items);
    CHECK(s.quantity >= 10);
    CHECK(s.quantity <= 100);
    CHECK(s.data.size() == 40);
    for (const auto& di : s.district_info) CHECK(di.size() == kDistInfoChars);
  }
}

TEST_CASE("the overlap knob is realized exactly, per warehouse") {
  for (double so : {0.0, 0.05, 0.19, 0.5, 1.0}) {
    CAPTURE(so);
    WorkloadConfig wc = small_config(9, so);
    WorkloadGenerator gen(wc);
    BaseTables t = gen.generate();

    std::map<std::uint32_t, std::uint32_t> stocked_by_w;
    std::map<std::uint32_t, std::uint32_t> total_by_w;
    for (const OrderlineRecord& o : t.orderlines) {
      ++total_by_w[o.warehouse_id];
      if (o.item_id <= wc.items)
        ++stocked_by_w[o.warehouse_id];
      else {
        CHECK(o.item_id > wc.items);       // dangling references live in
        CHECK(o.item_id <= 2 * wc.items);  // (items, 2*items]
      }
    }
    auto expect =
        static_cast<std::uint32_t>(std::ceil(so * wc.orderlines_per_warehouse));
    for (std::uint32_t w = 1; w <= wc.warehouses; ++w) {
      CHECK(total_by_w[w] == wc.orderlines_per_warehouse);
      CHECK(stocked_by_w[w] == expect);
    }
  }
}

TEST_CASE("orderlines form well-shaped orders") {
  WorkloadConfig wc = small_config(13);
  WorkloadGenerator gen(wc);
  BaseTables t = gen.generate();

  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>> pks;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::uint32_t>
      lines_per_order;
  for (const OrderlineRecord& o : t.orderlines) {
    CHECK(pks.insert({o.warehouse_id, o.district_id, o.order_id, o.line_number}).second);
    CHECK(o.district_id >= 1);
    CHECK(o.district_id <= kNumDistrictsPerWarehouse);
    CHECK(o.quantity >= 1);
    CHECK(o.quantity <= 10);
    CHECK(o.dist_info.size() == kDistInfoChars);
    auto& top = lines_per_order[{o.warehouse_id, o.district_id, o.order_id}];
    top = std::max(top, o.line_number);
  }
  // Line numbers are contiguous from 1 and orders hold 5..15 lines apart
  // from each warehouse's truncated tail.
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::uint32_t> count;
  for (const OrderlineRecord& o : t.orderlines)
    ++count[{o.warehouse_id, o.district_id, o.order_id}];
  std::map<std::uint32_t, std::uint32_t> short_orders;
  for (const auto& [key, n] : count) {
    CHECK(n == lines_per_order.at(key));
    CHECK(n <= 15);
    if (n < 5) ++short_orders[std::get<0>(key)];
  }
  for (const auto& [w, n] : short_orders) CHECK(n <= 1);
}

TEST_CASE("transactions apply cleanly to the reference db, forever") {
  WorkloadConfig wc = small_config(17);
  WorkloadGenerator gen(wc);
  BaseTables t = gen.generate();

  ShadowDb db;
  for (const StockRecord& s : t.stock) db.apply(Delta::insert_stock(s));
  for (const OrderlineRecord& o : t.orderlines) db.apply(Delta::insert_orderline(o));

  for (int txn = 0; txn < 200; ++txn) {
    auto deltas = gen.next_new_order();
    std::size_t line_inserts = 0, stock_updates = 0;
    std::set<std::uint32_t> items;
    for (const Delta& d : deltas) {
      d.validate();
      db.apply(d);  // throws on any stale old image
      if (d.kind == DeltaKind::Insert) {
        ++line_inserts;
        const auto& o = std::get<OrderlineRecord>(*d.new_image);
        CHECK(o.delivery_date == 0);  // not delivered yet
        items.insert(o.item_id);
      } else {
        ++stock_updates;
        const auto& ns = std::get<StockRecord>(*d.new_image);
        CHECK(ns.quantity >= 10);  // restock rule floor
        CHECK(ns.quantity <= 100 + 90);
      }
    }
    CHECK(line_inserts >= 5);
    CHECK(line_inserts <= 15);
    CHECK(stock_updates == items.size());  // coalesced per distinct item

    for (const Delta& d : gen.next_delivery()) {
      d.validate();
      db.apply(d);
      CHECK(d.kind == DeltaKind::Update);
      CHECK(d.table == SourceTag::Orderline);
      CHECK(std::get<OrderlineRecord>(*d.new_image).delivery_date >= 20000);
    }
  }
}

TEST_CASE("deliveries drain pending orders oldest first") {
  WorkloadConfig wc = small_config(19);
  WorkloadGenerator gen(wc);
  gen.generate();

  CHECK(gen.next_delivery().empty());  // nothing pending yet

  auto first = gen.next_new_order();
  auto second = gen.next_new_order();
  auto first_line = std::get<OrderlineRecord>(*first.front().new_image);
  auto second_line = std::get<OrderlineRecord>(*second.front().new_image);

  auto d1 = gen.next_delivery();
  REQUIRE_FALSE(d1.empty());
  auto delivered1 = std::get<OrderlineRecord>(*d1.front().old_image);
  CHECK(delivered1.order_id == first_line.order_id);
  CHECK(delivered1.district_id == first_line.district_id);

  // Each delivery stamps one whole order with one date.
  std::set<std::uint32_t> dates;
  for (const Delta& d : d1)
    dates.insert(std::get<OrderlineRecord>(*d.new_image).delivery_date);
  CHECK(dates.size() == 1);

  auto d2 = gen.next_delivery();
  auto delivered2 = std::get<OrderlineRecord>(*d2.front().old_image);
  CHECK(std::tuple(delivered2.district_id, delivered2.order_id) ==
        std::tuple(second_line.district_id, second_line.order_id));
  CHECK(std::get<OrderlineRecord>(*d2.front().new_image).delivery_date >
        *dates.begin());

  CHECK(gen.next_delivery().empty());  // queue drained
}

TEST_CASE("stock-level checks read a bounded recent window") {
  WorkloadConfig wc = small_config(23);
  WorkloadGenerator gen(wc);
  gen.generate();

  CHECK(gen.stock_level().lines.empty());

  for (int i = 0; i < 9; ++i) {
    gen.next_new_order();
    gen.next_delivery();
  }
  auto reads = gen.stock_level();
  CHECK_FALSE(reads.lines.empty());
  CHECK(reads.lines.size() <= 5 * 15);  // at most five orders

  std::set<std::pair<std::uint32_t, std::uint32_t>> distinct;
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>> orders;
  for (const OrderlineRecord& o : reads.lines) {
    CHECK(o.delivery_date >= 20000);  // only delivered lines
    distinct.insert({o.warehouse_id, o.item_id});
    orders.insert({o.warehouse_id, o.district_id, o.order_id, 0});
  }
  CHECK(orders.size() == 5);
  CHECK(reads.items.size() == distinct.size());
  for (const JoinKey& k : reads.items) CHECK(distinct.count({k.warehouse_id, k.item_id}));
}

TEST_CASE("point keys draw from an independent stream") {
  WorkloadGenerator a(small_config(29));
  a.generate();
  auto keys_after_txns = [&] {
    a.next_new_order();
    return a.point_keys(10);
  }();

  WorkloadGenerator b(small_config(29));
  b.generate();
  auto keys_untouched = b.point_keys(10);
  CHECK(keys_after_txns == keys_untouched);  // txns do not perturb point keys

  for (const JoinKey& k : keys_untouched) {
    CHECK(k.warehouse_id >= 1);
    CHECK(k.warehouse_id <= 2);
    CHECK(k.item_id >= 1);
    CHECK(k.item_id <= 50);
  }
}
