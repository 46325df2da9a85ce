#include <algorithm>
#include <vector>

#include "doctest.h"
#include "midx/join.hpp"
#include "midx/oracle.hpp"
#include "midx/workload.hpp"

using namespace midx;

namespace {

StockSource vector_stock_source(std::vector<StockRecord> rows) {
  auto state = std::make_shared<std::pair<std::vector<StockRecord>, std::size_t>>(
      std::move(rows), 0);
  return [state]() -> std::optional<StockRecord> {
    if (state->second >= state->first.size()) return std::nullopt;
    return state->first[state->second++];
  };
}

OrderlineSource vector_orderline_source(std::vector<OrderlineRecord> rows) {
  auto state = std::make_shared<std::pair<std::vector<OrderlineRecord>, std::size_t>>(
      std::move(rows), 0);
  return [state]() -> std::optional<OrderlineRecord> {
    if (state->second >= state->first.size()) return std::nullopt;
    return state->first[state->second++];
  };
}

StockRecord mk_stock(std::uint32_t w, std::uint32_t i, std::uint32_t qty = 50) {
  StockRecord s;
  s.warehouse_id = w;
  s.item_id = i;
  s.quantity = qty;
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
  return r;
}

const JoinType kAll[] = {JoinType::Inner,     JoinType::LeftOuter, JoinType::RightOuter,
                         JoinType::FullOuter, JoinType::LeftSemi,  JoinType::RightSemi};

void sort_for_join(std::vector<StockRecord>& stock, std::vector<OrderlineRecord>& lines) {
  std::sort(stock.begin(), stock.end(), [](const StockRecord& a, const StockRecord& b) {
    return join_key_of(a) < join_key_of(b);
  });
  std::sort(lines.begin(), lines.end(),
            [](const OrderlineRecord& a, const OrderlineRecord& b) {
              auto ka = join_key_of(a), kb = join_key_of(b);
              if (ka != kb) return ka < kb;
              return std::tuple(a.district_id, a.order_id, a.line_number) <
                     std::tuple(b.district_id, b.order_id, b.line_number);
            });
}

}  // namespace

TEST_CASE("group join matches the brute-force reference on random tables") {
  Rng rng(43);
  for (int round = 0; round < 30; ++round) {
    CAPTURE(round);
    std::vector<StockRecord> stock;
    std::vector<OrderlineRecord> lines;
    ShadowDb oracle;

    for (std::uint32_t w = 1; w <= 2; ++w)
      for (std::uint32_t i = 1; i <= 12; ++i)
        if (rng.uniform(0, 2)) {  // some groups have no stock row
          StockRecord s = mk_stock(w, i, rng.uniform(10, 100));
          stock.push_back(s);
          oracle.apply(Delta::insert_stock(s));
        }
    std::uint32_t next_order = 1;
    for (int n = rng.uniform(5, 40); n > 0; --n) {
      OrderlineRecord o = mk_line(rng.uniform(1, 2), rng.uniform(1, 16),
                                  rng.uniform(1, 3), next_order++, 1);
      lines.push_back(o);
      oracle.apply(Delta::insert_orderline(o));
    }
    sort_for_join(stock, lines);

    for (JoinType jt : kAll) {
      CAPTURE(to_string(jt));
      MetricsCounters counters;
      auto stream = make_group_join(jt, vector_stock_source(stock),
                                    vector_orderline_source(lines), &counters);
      CHECK(canonical_multiset(stream->drain()) ==
            canonical_multiset(oracle.join(jt, IncludedColumnsPolicy::All)));
    }
  }
}

TEST_CASE("degenerate inputs") {
  for (JoinType jt : kAll) {
    CAPTURE(to_string(jt));
    MetricsCounters c;
    auto empty = make_group_join(jt, vector_stock_source({}), vector_orderline_source({}), &c);
    CHECK(empty->drain().empty());
  }

  // Stock-only table: only joins preserving the stock side produce rows.
  std::vector<StockRecord> stock{mk_stock(1, 1), mk_stock(1, 2)};
  MetricsCounters c;
  CHECK(make_group_join(JoinType::Inner, vector_stock_source(stock),
                        vector_orderline_source({}), &c)
            ->drain()
            .empty());
  CHECK(make_group_join(JoinType::LeftOuter, vector_stock_source(stock),
                        vector_orderline_source({}), &c)
            ->drain()
            .empty());
  auto rows = make_group_join(JoinType::FullOuter, vector_stock_source(stock),
                              vector_orderline_source({}), &c)
                  ->drain();
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].orderline.has_value());
  CHECK(rows[0].stock.has_value());

  // Orderline-only table mirrors it.
  std::vector<OrderlineRecord> lines{mk_line(1, 1, 1, 1, 1), mk_line(1, 1, 1, 1, 2)};
  CHECK(make_group_join(JoinType::RightOuter, vector_stock_source({}),
                        vector_orderline_source(lines), &c)
            ->drain()
            .empty());
  rows = make_group_join(JoinType::LeftOuter, vector_stock_source({}),
                         vector_orderline_source(lines), &c)
             ->drain();
  CHECK(rows.size() == 2);
}

TEST_CASE("the operator buffers only the stock side of one group") {
  // Three same-key stock rows are impossible under the schema but legal for
  // the operator; they pin the buffer high-water mark at exactly three.
  std::vector<StockRecord> stock{mk_stock(1, 5, 1), mk_stock(1, 5, 2), mk_stock(1, 5, 3)};
  std::vector<OrderlineRecord> lines;
  for (std::uint32_t n = 1; n <= 40; ++n) lines.push_back(mk_line(1, 5, 1, n, 1));

  MetricsCounters c;
  auto rows = make_group_join(JoinType::Inner, vector_stock_source(stock),
                              vector_orderline_source(lines), &c)
                  ->drain();
  CHECK(rows.size() == 3 * 40);
  CHECK(c.group_buffer_peak == 3);

  // Semi joins collapse the multiplicity on the probed side.
  MetricsCounters c2;
  rows = make_group_join(JoinType::LeftSemi, vector_stock_source(stock),
                         vector_orderline_source(lines), &c2)
             ->drain();
  CHECK(rows.size() == 40);
  for (const JoinRow& r : rows) {
    CHECK(r.orderline.has_value());
    CHECK_FALSE(r.stock.has_value());
  }

  rows = make_group_join(JoinType::RightSemi, vector_stock_source(stock),
                         vector_orderline_source(lines), &c2)
             ->drain();
  CHECK(rows.size() == 3);
  for (const JoinRow& r : rows) {
    CHECK_FALSE(r.orderline.has_value());
    CHECK(r.stock.has_value());
  }
}

TEST_CASE("buffer peak tracks the widest group, not the table size") {
  std::vector<StockRecord> stock;
  std::vector<OrderlineRecord> lines;
  for (std::uint32_t i = 1; i <= 50; ++i) {
    stock.push_back(mk_stock(1, i));
    lines.push_back(mk_line(1, i, 1, i, 1));
  }
  MetricsCounters c;
  make_group_join(JoinType::FullOuter, vector_stock_source(stock),
                  vector_orderline_source(lines), &c)
      ->drain();
  CHECK(c.group_buffer_peak == 1);
}

TEST_CASE("canonical strings separate rows that differ anywhere") {
  JoinRow a{{1, 2}, mk_line(1, 2, 3, 4, 5), mk_stock(1, 2)};
  JoinRow b = a;
  CHECK(to_canonical_string(a) == to_canonical_string(b));

  b.stock->quantity ^= 1;
  CHECK(to_canonical_string(a) != to_canonical_string(b));

  JoinRow no_stock{{1, 2}, mk_line(1, 2, 3, 4, 5), std::nullopt};
  JoinRow empty_stock{{1, 2}, mk_line(1, 2, 3, 4, 5), StockRecord{}};
  CHECK(to_canonical_string(no_stock) != to_canonical_string(empty_stock));

  // Text fields with embedded separators cannot collide across columns.
  JoinRow t1{{1, 2}, std::nullopt, mk_stock(1, 2)};
  JoinRow t2 = t1;
  t1.stock->data = "ab";
  t2.stock->data = "a";
  t2.stock->district_info[0] = "b";
  CHECK(to_canonical_string(t1) != to_canonical_string(t2));
}

TEST_CASE("join type names round-trip and sources are mandatory") {
  for (JoinType jt : kAll) CHECK(join_type_from_string(to_string(jt)) == jt);
  CHECK_THROWS_AS(join_type_from_string("sideways"), ConfigError);

  MetricsCounters c;
  CHECK_THROWS_AS(make_group_join(JoinType::Inner, StockSource{},
                                  vector_orderline_source({}), &c),
                  ConfigError);
}
