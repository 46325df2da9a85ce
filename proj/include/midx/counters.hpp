#pragma once

#include <cstdint>

namespace midx {

// Deterministic access counters. Every store keeps one instance; the
// simulated buffer pool feeds buffer_misses and dirty_writebacks, the
// backends feed the rest. All values are cumulative until reset().
struct MetricsCounters {
  std::uint64_t node_reads = 0;    // page fixes for lookup/descent/scan
  std::uint64_t node_writes = 0;   // pages dirtied or freshly created
  std::uint64_t buffer_misses = 0; // pool misses ("disk reads")
  std::uint64_t dirty_writebacks = 0; // evicted dirty pages ("disk writes")
  std::uint64_t key_comparisons = 0;
  std::uint64_t entries_scanned = 0; // entries examined by scans
  std::uint64_t bytes_read = 0;      // key+value bytes materialized
  std::uint64_t bytes_written = 0;   // key+value bytes persisted
  std::uint64_t root_to_leaf_traversals = 0;

  // Logical operation counts (artifact plumbing; lets maintenance tests
  // assert "exactly one mutation, zero probes" without guessing from
  // node accesses).
  std::uint64_t ops_get = 0;
  std::uint64_t ops_put = 0;
  std::uint64_t ops_replace = 0;
  std::uint64_t ops_erase = 0;
  std::uint64_t ops_scan = 0;

  // High-water mark of entries buffered by group-wise join processing.
  std::uint64_t group_buffer_peak = 0;

  void reset() { *this = MetricsCounters{}; }

  std::uint64_t node_accesses() const { return node_reads + node_writes; }
  std::uint64_t mutations() const { return ops_put + ops_replace + ops_erase; }
  std::uint64_t probes() const { return ops_get + ops_scan; }

  MetricsCounters& operator+=(const MetricsCounters& o) {
    node_reads += o.node_reads;
    node_writes += o.node_writes;
    buffer_misses += o.buffer_misses;
    dirty_writebacks += o.dirty_writebacks;
    key_comparisons += o.key_comparisons;
    entries_scanned += o.entries_scanned;
    bytes_read += o.bytes_read;
    bytes_written += o.bytes_written;
    root_to_leaf_traversals += o.root_to_leaf_traversals;
    ops_get += o.ops_get;
    ops_put += o.ops_put;
    ops_replace += o.ops_replace;
    ops_erase += o.ops_erase;
    ops_scan += o.ops_scan;
    if (o.group_buffer_peak > group_buffer_peak) group_buffer_peak = o.group_buffer_peak;
    return *this;
  }
};

}  // namespace midx
