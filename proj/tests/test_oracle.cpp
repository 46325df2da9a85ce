#include <algorithm>

#include "doctest.h"
#include "midx/oracle.hpp"
#include "midx/workload.hpp"

using namespace midx;

namespace {

StockRecord mk_stock(std::uint32_t w, std::uint32_t i) {
  StockRecord s;
  s.warehouse_id = w;
  s.item_id = i;
  s.quantity = 42;
  s.year_to_date = 7;
  s.order_count = 2;
  s.data = "stocked";
  for (auto& di : s.district_info) di = std::string(kDistInfoChars, 'd');
  return s;
}

OrderlineRecord mk_line(std::uint32_t w, std::uint32_t i, std::uint32_t d,
                        std::uint32_t o, std::uint32_t l) {
  OrderlineRecord r;
  r.warehouse_id = w;
  r.district_id = d;
  r.order_id = o;
  r.line_number = l;
  r.item_id = i;
  r.supply_warehouse_id = w;
  r.delivery_date = 5000;
  r.quantity = 3;
  r.amount = 1234;
  r.dist_info = std::string(kDistInfoChars, 'x');
  return r;
}

}  // namespace

TEST_CASE("the reference db rejects impossible deltas") {
  ShadowDb db;
  StockRecord s = mk_stock(1, 1);
  db.apply(Delta::insert_stock(s));
  CHECK_THROWS_AS(db.apply(Delta::insert_stock(s)), IntegrityError);

  CHECK_THROWS_AS(db.apply(Delta::delete_stock(mk_stock(1, 9))), IntegrityError);

  StockRecord stale = s;
  stale.quantity ^= 1;
  CHECK_THROWS_AS(db.apply(Delta::delete_stock(stale)), IntegrityError);
  CHECK_THROWS_AS(db.apply(Delta::update_stock(stale, s)), IntegrityError);

  StockRecord fresh = s;
  fresh.quantity = 99;
  db.apply(Delta::update_stock(s, fresh));
  CHECK(db.find_stock(1, 1)->quantity == 99);

  OrderlineRecord o = mk_line(1, 1, 1, 1, 1);
  db.apply(Delta::insert_orderline(o));
  CHECK_THROWS_AS(db.apply(Delta::insert_orderline(o)), IntegrityError);
  db.apply(Delta::delete_orderline(o));
  CHECK_FALSE(db.find_orderline(1, 1, 1, 1).has_value());
}

TEST_CASE("hand-computed join cardinalities on a three-group table") {
  // Group (1,1): stock only. Group (1,2): stock with two lines.
  // Group (1,3): one dangling line.
  ShadowDb db;
  db.apply(Delta::insert_stock(mk_stock(1, 1)));
  db.apply(Delta::insert_stock(mk_stock(1, 2)));
  db.apply(Delta::insert_orderline(mk_line(1, 2, 1, 1, 1)));
  db.apply(Delta::insert_orderline(mk_line(1, 2, 1, 1, 2)));
  db.apply(Delta::insert_orderline(mk_line(1, 3, 2, 1, 1)));

  auto p = IncludedColumnsPolicy::All;
  CHECK(db.join(JoinType::Inner, p).size() == 2);
  CHECK(db.join(JoinType::LeftOuter, p).size() == 3);
  CHECK(db.join(JoinType::RightOuter, p).size() == 3);
  CHECK(db.join(JoinType::FullOuter, p).size() == 4);
  CHECK(db.join(JoinType::LeftSemi, p).size() == 2);
  CHECK(db.join(JoinType::RightSemi, p).size() == 1);

  for (const JoinRow& r : db.join(JoinType::Inner, p)) {
    REQUIRE(r.orderline.has_value());
    REQUIRE(r.stock.has_value());
    CHECK(r.key == JoinKey{1, 2});
    CHECK(r.orderline->item_id == r.stock->item_id);
  }
  for (const JoinRow& r : db.join(JoinType::LeftSemi, p)) {
    CHECK(r.orderline.has_value());
    CHECK_FALSE(r.stock.has_value());
  }
  for (const JoinRow& r : db.join(JoinType::RightSemi, p)) {
    CHECK_FALSE(r.orderline.has_value());
    CHECK(r.stock->item_id == 2);
  }

  // The full outer join has exactly one stock-only and one orderline-only row.
  std::size_t stock_only = 0, line_only = 0;
  for (const JoinRow& r : db.join(JoinType::FullOuter, p)) {
    stock_only += !r.orderline && r.stock;
    line_only += r.orderline && !r.stock;
  }
  CHECK(stock_only == 1);
  CHECK(line_only == 1);
}

TEST_CASE("scoped joins filter by warehouse and join key") {
  ShadowDb db;
  db.apply(Delta::insert_stock(mk_stock(1, 1)));
  db.apply(Delta::insert_stock(mk_stock(2, 1)));
  db.apply(Delta::insert_orderline(mk_line(1, 1, 1, 1, 1)));
  db.apply(Delta::insert_orderline(mk_line(2, 1, 1, 1, 1)));
  db.apply(Delta::insert_orderline(mk_line(2, 1, 1, 1, 2)));

  auto p = IncludedColumnsPolicy::All;
  CHECK(db.join(JoinType::Inner, p).size() == 3);
  CHECK(db.join_warehouse(JoinType::Inner, p, 1).size() == 1);
  CHECK(db.join_warehouse(JoinType::Inner, p, 2).size() == 2);
  CHECK(db.join_key(JoinType::Inner, p, 2, 1).size() == 2);
  CHECK(db.join_key(JoinType::Inner, p, 2, 9).empty());
  CHECK(db.join_key(JoinType::FullOuter, p, 2, 9).empty());
}

TEST_CASE("longhand projection agrees with the codec round trip") {
  // Two independent implementations of the same column subsets; a drift in
  // either shows up here.
  Rng rng(47);
  WorkloadConfig wc;
  wc.warehouses = 1;
  wc.items = 30;
  wc.orderlines_per_warehouse = 90;
  wc.seed = 4242;
  WorkloadGenerator gen(wc);
  BaseTables t = gen.generate();

  for (IncludedColumnsPolicy p : {IncludedColumnsPolicy::All, IncludedColumnsPolicy::Covering,
                                  IncludedColumnsPolicy::Keys}) {
    for (const StockRecord& s : t.stock) CHECK(oracle_project(s, p) == project(s, p));
    for (const OrderlineRecord& o : t.orderlines)
      CHECK(oracle_project(o, p) == project(o, p));
  }
}

TEST_CASE("policy projection keeps keys and drops the rest") {
  StockRecord s = mk_stock(3, 4);
  StockRecord keys_only = oracle_project(s, IncludedColumnsPolicy::Keys);
  CHECK(keys_only.warehouse_id == 3);
  CHECK(keys_only.item_id == 4);
  CHECK(keys_only.quantity == 0);
  CHECK(keys_only.data.empty());
  CHECK(keys_only.district_info[0].empty());

  StockRecord covering = oracle_project(s, IncludedColumnsPolicy::Covering);
  CHECK(covering.quantity == s.quantity);
  CHECK(covering.data == s.data);
  CHECK(covering.district_info[0].empty());

  OrderlineRecord o = mk_line(3, 4, 1, 2, 1);
  OrderlineRecord ol_keys = oracle_project(o, IncludedColumnsPolicy::Keys);
  CHECK(ol_keys.item_id == 4);  // the join attribute always survives
  CHECK(ol_keys.amount == 0);
  CHECK(ol_keys.dist_info.empty());

  OrderlineRecord ol_cov = oracle_project(o, IncludedColumnsPolicy::Covering);
  CHECK(ol_cov.amount == o.amount);
  CHECK(ol_cov.delivery_date == o.delivery_date);
  CHECK(ol_cov.supply_warehouse_id == 0);
}

TEST_CASE("canonical multisets ignore order but nothing else") {
  ShadowDb db;
  db.apply(Delta::insert_stock(mk_stock(1, 1)));
  db.apply(Delta::insert_orderline(mk_line(1, 1, 1, 1, 1)));
  db.apply(Delta::insert_orderline(mk_line(1, 1, 1, 2, 1)));

  auto rows = db.join(JoinType::Inner, IncludedColumnsPolicy::All);
  auto shuffled = rows;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(canonical_multiset(rows) == canonical_multiset(shuffled));

  shuffled.pop_back();
  CHECK(canonical_multiset(rows) != canonical_multiset(shuffled));

  // Duplicate rows count.
  auto doubled = rows;
  doubled.push_back(rows.front());
  CHECK(canonical_multiset(rows) != canonical_multiset(doubled));
}
