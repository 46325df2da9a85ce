#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "midx/counters.hpp"
#include "midx/join.hpp"
#include "midx/schema.hpp"
#include "midx/store.hpp"
#include "midx/workload.hpp"

namespace midx {

enum class Structure : std::uint8_t { Merged, Traditional, MatView };

std::string_view to_string(Structure s);
Structure structure_from_string(std::string_view s);

// One benchmark cell: a structure on a backend under one workload setting.
struct ExperimentConfig {
  Backend backend = Backend::BTree;
  Structure structure = Structure::Merged;
  IncludedColumnsPolicy policy = IncludedColumnsPolicy::All;
  JoinType join_type = JoinType::Inner;
  std::string pool_label = "small";
  std::size_t pool_pages = kSmallPoolPages;
  WorkloadConfig workload;
  std::size_t point_ops = 2000;
  std::size_t update_txns = 500;
  std::string phase = "all";  // all | load | point | scan | update
  LsmOptions lsm;

  std::string id() const;
};

struct PhaseMetrics {
  std::string phase;
  std::uint64_t ops = 0;   // operations issued (loads, queries, deltas)
  std::uint64_t rows = 0;  // rows produced or applied
  MetricsCounters counters;
  double wall_ms = 0.0;  // reported in JSON only; CSV stays byte-stable

  double accesses_per_op() const;
  double misses_per_op() const;
  double read_share() const;
};

struct StoreBreakdown {
  std::string store;
  StoreStats stats;
};

struct ExperimentResult {
  ExperimentConfig cfg;
  std::vector<PhaseMetrics> phases;
  std::vector<StoreBreakdown> space;  // captured right after load
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// The full default sweep: backend x pool x overlap x join type x policy x
// structure, everything else at workload defaults.
std::vector<ExperimentConfig> default_grid();

// `key = v1, v2, ...` per line; '#' starts a comment. List keys: backend,
// pool, stock_overlap, join_type, policy, structure. Scalar keys:
// warehouses, items, orderlines_per_warehouse, seed, point_ops, update_txns,
// phase. Throws ConfigError with a line number.
std::vector<ExperimentConfig> parse_grid_file(const std::string& path);

void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
void write_ratios_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
void write_space_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
std::string results_json(const std::vector<ExperimentResult>& results);

// Cross-checks every structure and backend against the brute-force
// reference on several small seeded databases, before and after applying a
// shared transaction stream. Logs one line per check; returns overall truth.
bool run_verify(std::uint64_t seed, std::ostream& log);

}  // namespace midx
