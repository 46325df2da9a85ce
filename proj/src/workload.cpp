#include "midx/workload.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "midx/errors.hpp"

namespace midx {

namespace {

constexpr std::size_t kGeneratedDataChars = 40;  // stock data column width
constexpr std::uint32_t kMinLinesPerOrder = 5;
constexpr std::uint32_t kMaxLinesPerOrder = 15;
constexpr std::size_t kRecentOrders = 5;  // window watched by stock-level checks

}  // namespace

void WorkloadConfig::validate() const {
  if (warehouses == 0) throw ConfigError("workload: warehouses must be >= 1");
  if (items == 0) throw ConfigError("workload: items must be >= 1");
  if (items > (1u << 30)) throw ConfigError("workload: items too large");
  if (!(stock_overlap >= 0.0 && stock_overlap <= 1.0))
    throw ConfigError("workload: stock_overlap must be in [0, 1]");
}

WorkloadGenerator::WorkloadGenerator(WorkloadConfig cfg)
    : cfg_(cfg), rng_(cfg.seed), point_rng_(cfg.seed ^ 0xA5A5A5A5DEADBEEFull) {
  cfg_.validate();
}

std::string WorkloadGenerator::random_text(Rng& rng, std::size_t chars) {
  std::string s;
  s.reserve(chars);
  for (std::size_t k = 0; k < chars; ++k)
    s.push_back(static_cast<char>('a' + rng.uniform(0, 25)));
  return s;
}

OrderlineRecord WorkloadGenerator::make_line(Rng& rng, std::uint32_t w, std::uint32_t d,
                                             std::uint32_t o, std::uint32_t l,
                                             std::uint32_t item,
                                             std::uint32_t delivered) {
  OrderlineRecord rec;
  rec.warehouse_id = w;
  rec.district_id = d;
  rec.order_id = o;
  rec.line_number = l;
  rec.item_id = item;
  rec.supply_warehouse_id = w;
  rec.delivery_date = delivered;
  rec.quantity = rng.uniform(1, 10);
  rec.amount = rng.uniform(100, 999999);
  rec.dist_info = random_text(rng, kDistInfoChars);
  return rec;
}

BaseTables WorkloadGenerator::generate() {
  if (generated_) throw ConfigError("workload: generate() already called");
  generated_ = true;

  BaseTables t;
  t.stock.reserve(std::size_t(cfg_.warehouses) * cfg_.items);
  for (std::uint32_t w = 1; w <= cfg_.warehouses; ++w) {
    for (std::uint32_t i = 1; i <= cfg_.items; ++i) {
      StockRecord s;
      s.warehouse_id = w;
      s.item_id = i;
      s.quantity = rng_.uniform(10, 100);
      s.year_to_date = 0;
      s.order_count = 0;
      s.data = random_text(rng_, kGeneratedDataChars);
      for (auto& di : s.district_info) di = random_text(rng_, kDistInfoChars);
      t.stock.push_back(s);
      stock_state_.emplace(std::make_pair(w, i), std::move(s));
    }
  }

  const std::uint32_t n = cfg_.orderlines_per_warehouse;
  const auto stocked_lines =
      static_cast<std::uint32_t>(std::ceil(cfg_.stock_overlap * double(n)));
  t.orderlines.reserve(std::size_t(cfg_.warehouses) * n);
  for (std::uint32_t w = 1; w <= cfg_.warehouses; ++w) {
    std::vector<std::uint8_t> stocked(n, 0);
    std::fill(stocked.begin(), stocked.begin() + std::min(stocked_lines, n), 1);
    rng_.shuffle(stocked);

    std::array<std::uint32_t, kNumDistrictsPerWarehouse> next_o{};
    next_o.fill(1);
    std::uint32_t produced = 0;
    std::uint32_t order_seq = 0;
    while (produced < n) {
      std::uint32_t d = (order_seq++ % kNumDistrictsPerWarehouse) + 1;
      std::uint32_t o = next_o[d - 1]++;
      std::uint32_t lines =
          std::min(rng_.uniform(kMinLinesPerOrder, kMaxLinesPerOrder), n - produced);
      for (std::uint32_t l = 1; l <= lines; ++l) {
        std::uint32_t item = stocked[produced]
                                 ? rng_.uniform(1, cfg_.items)
                                 : rng_.uniform(cfg_.items + 1, cfg_.items * 2);
        t.orderlines.push_back(
            make_line(rng_, w, d, o, l, item, rng_.uniform(1000, 9999)));
        ++produced;
      }
    }
    for (std::uint32_t d = 1; d <= kNumDistrictsPerWarehouse; ++d)
      next_order_[{w, d}] = next_o[d - 1];
  }
  return t;
}

std::vector<JoinKey> WorkloadGenerator::point_keys(std::size_t count) {
  std::vector<JoinKey> keys;
  keys.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    keys.push_back({point_rng_.uniform(1, cfg_.warehouses),
                    point_rng_.uniform(1, cfg_.items)});
  return keys;
}

std::vector<Delta> WorkloadGenerator::next_new_order() {
  if (!generated_) throw ConfigError("workload: generate() must run first");
  std::uint32_t w = rng_.uniform(1, cfg_.warehouses);
  std::uint32_t d = rng_.uniform(1, kNumDistrictsPerWarehouse);
  std::uint32_t o = next_order_[{w, d}]++;
  std::uint32_t lines = rng_.uniform(kMinLinesPerOrder, kMaxLinesPerOrder);

  std::vector<Delta> deltas;
  deltas.reserve(lines + 4);
  std::map<std::uint32_t, std::uint32_t> ordered_qty;  // item -> total quantity
  std::vector<OrderlineRecord> order;
  order.reserve(lines);
  for (std::uint32_t l = 1; l <= lines; ++l) {
    OrderlineRecord rec = make_line(rng_, w, d, o, l, rng_.uniform(1, cfg_.items), 0);
    ordered_qty[rec.item_id] += rec.quantity;
    order.push_back(rec);
    deltas.push_back(Delta::insert_orderline(std::move(rec)));
  }
  pending_.push_back(std::move(order));
  for (const auto& [item, qty] : ordered_qty) {
    StockRecord& cur = stock_state_.at({w, item});
    StockRecord next = cur;
    std::int64_t q = std::int64_t(cur.quantity) - qty;
    while (q < 10) q += 91;  // restock rule, repeated so coalesced lines stay valid
    next.quantity = static_cast<std::uint32_t>(q);
    next.year_to_date = cur.year_to_date + qty;
    next.order_count = cur.order_count + 1;
    deltas.push_back(Delta::update_stock(cur, next));
    cur = std::move(next);
  }
  return deltas;
}

std::vector<Delta> WorkloadGenerator::next_delivery() {
  if (!generated_) throw ConfigError("workload: generate() must run first");
  std::vector<Delta> deltas;
  if (pending_.empty()) return deltas;
  std::vector<OrderlineRecord> order = std::move(pending_.front());
  pending_.pop_front();
  const std::uint32_t date = delivery_seq_++;
  deltas.reserve(order.size());
  for (auto& line : order) {
    OrderlineRecord next = line;
    next.delivery_date = date;
    deltas.push_back(Delta::update_orderline(line, next));
    line = std::move(next);
  }
  recent_.push_back(std::move(order));
  if (recent_.size() > kRecentOrders) recent_.pop_front();
  return deltas;
}

WorkloadGenerator::StockLevelReads WorkloadGenerator::stock_level() const {
  StockLevelReads r;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& order : recent_) {
    for (const auto& line : order) {
      r.lines.push_back(line);
      if (seen.insert({line.warehouse_id, line.item_id}).second)
        r.items.push_back({line.warehouse_id, line.item_id});
    }
  }
  return r;
}

}  // namespace midx
