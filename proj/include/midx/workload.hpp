#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "midx/schema.hpp"

namespace midx {

// splitmix64: tiny, seedable, identical output everywhere. The benchmark's
// determinism rests on this plus fixed iteration orders.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Inclusive bounds.
  std::uint32_t uniform(std::uint32_t lo, std::uint32_t hi) {
    return lo + static_cast<std::uint32_t>(next_u64() % (std::uint64_t(hi) - lo + 1));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }
};

struct WorkloadConfig {
  std::uint32_t warehouses = 2;
  std::uint32_t items = 2000;                   // stocked item ids: 1..items
  std::uint32_t orderlines_per_warehouse = 10000;
  double stock_overlap = 1.0;                   // share of lines on stocked items
  std::uint64_t seed = 42;

  void validate() const;  // throws ConfigError
};

struct BaseTables {
  std::vector<StockRecord> stock;
  std::vector<OrderlineRecord> orderlines;
};

// Deterministic order-entry style workload: per warehouse, every item is
// stocked and orderlines arrive in orders of 5..15 lines spread over 10
// districts. A line references a stocked item with probability
// `stock_overlap` (realized exactly: ceil(so * n) lines per warehouse);
// the rest reference absent items in (items, 2*items].
class WorkloadGenerator {
 public:
  explicit WorkloadGenerator(WorkloadConfig cfg);

  const WorkloadConfig& config() const { return cfg_; }

  // Call once. Also primes the transaction state below.
  BaseTables generate();

  // Join keys of stocked items, for point queries. Independent rng stream.
  std::vector<JoinKey> point_keys(std::size_t count);

  // One new-order transaction: 5..15 orderline inserts followed by one
  // coalesced stock update per distinct item ordered.
  std::vector<Delta> next_new_order();

  // One delivery transaction: stamps the delivery date on every line of the
  // oldest undelivered order. Empty if nothing is pending.
  std::vector<Delta> next_delivery();

  // Read set of a stock-level check: all lines of the most recently
  // delivered orders plus the distinct items they reference.
  struct StockLevelReads {
    std::vector<OrderlineRecord> lines;
    std::vector<JoinKey> items;
  };
  StockLevelReads stock_level() const;

 private:
  std::string random_text(Rng& rng, std::size_t chars);
  OrderlineRecord make_line(Rng& rng, std::uint32_t w, std::uint32_t d, std::uint32_t o,
                            std::uint32_t l, std::uint32_t item, std::uint32_t delivered);

  WorkloadConfig cfg_;
  Rng rng_;
  Rng point_rng_;
  bool generated_ = false;
  std::map<std::pair<std::uint32_t, std::uint32_t>, StockRecord> stock_state_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> next_order_;
  std::deque<std::vector<OrderlineRecord>> pending_;  // undelivered orders, FIFO
  std::deque<std::vector<OrderlineRecord>> recent_;   // last few delivered orders
  std::uint32_t delivery_seq_ = 20000;
};

}  // namespace midx
