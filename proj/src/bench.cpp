#include "midx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "midx/baselines.hpp"
#include "midx/errors.hpp"
#include "midx/merged_index.hpp"
#include "midx/oracle.hpp"

namespace midx {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count();
}

// A view can store inner or full_outer; any other requested join type is
// served by filtering a full_outer view.
JoinType stored_view_of(JoinType jt) {
  return (jt == JoinType::Inner || jt == JoinType::FullOuter) ? jt : JoinType::FullOuter;
}

}  // namespace

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::Merged: return "merged";
    case Structure::Traditional: return "traditional";
    case Structure::MatView: return "matview";
  }
  return "merged";
}

Structure structure_from_string(std::string_view s) {
  if (s == "merged") return Structure::Merged;
  if (s == "traditional") return Structure::Traditional;
  if (s == "matview") return Structure::MatView;
  throw ConfigError("unknown structure: " + std::string(s));
}

std::string ExperimentConfig::id() const {
  std::string out;
  out += to_string(backend);
  out += '.';
  out += pool_label;
  out += '.';
  out += to_string(structure);
  out += '.';
  out += to_string(policy);
  out += '.';
  out += to_string(join_type);
  out += ".so";
  out += fmt_double(workload.stock_overlap);
  return out;
}

double PhaseMetrics::accesses_per_op() const {
  return ops ? double(counters.node_accesses()) / double(ops) : 0.0;
}

double PhaseMetrics::misses_per_op() const {
  return ops ? double(counters.buffer_misses) / double(ops) : 0.0;
}

double PhaseMetrics::read_share() const {
  std::uint64_t total = counters.node_reads + counters.node_writes;
  return total ? double(counters.node_reads) / double(total) : 0.0;
}

namespace {

struct Harness {
  virtual ~Harness() = default;
  virtual void bulk_load(const BaseTables& t) = 0;
  virtual void apply(const Delta& d) = 0;
  virtual std::optional<StockRecord> read_stock(std::uint32_t w, std::uint32_t i) = 0;
  virtual std::optional<OrderlineRecord> read_orderline(std::uint32_t w, std::uint32_t i,
                                                        std::uint32_t d, std::uint32_t o,
                                                        std::uint32_t l) = 0;
  virtual std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w,
                                               std::uint32_t i) = 0;
  virtual std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w) = 0;
  virtual std::vector<OrderedStore*> stores() = 0;
  virtual MetricsCounters* extra() { return nullptr; }
  virtual void compact_all() = 0;
};

struct MergedHarness final : Harness {
  MergedIndex idx;
  MergedHarness(const ExperimentConfig& cfg, std::shared_ptr<BufferPool> pool)
      : idx(cfg.backend, cfg.policy, std::move(pool), cfg.lsm) {}
  void bulk_load(const BaseTables& t) override { idx.bulk_load(t.stock, t.orderlines); }
  void apply(const Delta& d) override { idx.apply(d); }
  std::optional<StockRecord> read_stock(std::uint32_t w, std::uint32_t i) override {
    return idx.get_stock(w, i);
  }
  std::optional<OrderlineRecord> read_orderline(std::uint32_t w, std::uint32_t i,
                                                std::uint32_t d, std::uint32_t o,
                                                std::uint32_t l) override {
    return idx.get_orderline(w, i, d, o, l);
  }
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w,
                                       std::uint32_t i) override {
    return idx.join_key(jt, w, i);
  }
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w) override {
    return idx.join_warehouse(jt, w);
  }
  std::vector<OrderedStore*> stores() override { return {&idx.store()}; }
  void compact_all() override { idx.compact(); }
};

struct TraditionalHarness final : Harness {
  TraditionalIndexes idx;
  TraditionalHarness(const ExperimentConfig& cfg, std::shared_ptr<BufferPool> pool)
      : idx(cfg.backend, cfg.policy, std::move(pool), cfg.lsm) {}
  void bulk_load(const BaseTables& t) override { idx.bulk_load(t.stock, t.orderlines); }
  void apply(const Delta& d) override { idx.apply(d); }
  std::optional<StockRecord> read_stock(std::uint32_t w, std::uint32_t i) override {
    return idx.get_stock(w, i);
  }
  std::optional<OrderlineRecord> read_orderline(std::uint32_t w, std::uint32_t i,
                                                std::uint32_t d, std::uint32_t o,
                                                std::uint32_t l) override {
    return idx.get_orderline(w, i, d, o, l);
  }
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w,
                                       std::uint32_t i) override {
    return idx.join_key(jt, w, i);
  }
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w) override {
    return idx.join_warehouse(jt, w);
  }
  std::vector<OrderedStore*> stores() override { return idx.stores(); }
  MetricsCounters* extra() override { return &idx.extra(); }
  void compact_all() override { idx.compact(); }
};

struct MatViewHarness final : Harness {
  MaterializedJoinView idx;
  MatViewHarness(const ExperimentConfig& cfg, std::shared_ptr<BufferPool> pool)
      : idx(cfg.backend, cfg.policy, stored_view_of(cfg.join_type), std::move(pool),
            cfg.lsm) {}
  void bulk_load(const BaseTables& t) override { idx.bulk_load(t.stock, t.orderlines); }
  void apply(const Delta& d) override { idx.apply(d); }
  std::optional<StockRecord> read_stock(std::uint32_t w, std::uint32_t i) override {
    return idx.get_stock(w, i);
  }
  std::optional<OrderlineRecord> read_orderline(std::uint32_t w, std::uint32_t i,
                                                std::uint32_t d, std::uint32_t o,
                                                std::uint32_t l) override {
    return idx.get_orderline(w, i, d, o, l);
  }
  std::unique_ptr<JoinStream> join_key(JoinType jt, std::uint32_t w,
                                       std::uint32_t i) override {
    return idx.join_key(jt, w, i);
  }
  std::unique_ptr<JoinStream> join_warehouse(JoinType jt, std::uint32_t w) override {
    return idx.join_warehouse(jt, w);
  }
  std::vector<OrderedStore*> stores() override { return idx.stores(); }
  MetricsCounters* extra() override { return &idx.extra(); }
  void compact_all() override { idx.compact(); }
};

std::unique_ptr<Harness> make_harness(const ExperimentConfig& cfg,
                                      std::shared_ptr<BufferPool> pool) {
  switch (cfg.structure) {
    case Structure::Merged: return std::make_unique<MergedHarness>(cfg, std::move(pool));
    case Structure::Traditional:
      return std::make_unique<TraditionalHarness>(cfg, std::move(pool));
    case Structure::MatView:
      return std::make_unique<MatViewHarness>(cfg, std::move(pool));
  }
  throw ConfigError("bad structure");
}

void reset_counters(Harness& h) {
  for (OrderedStore* s : h.stores()) s->counters().reset();
  if (MetricsCounters* e = h.extra()) e->reset();
}

MetricsCounters aggregate_counters(Harness& h) {
  MetricsCounters total;
  for (OrderedStore* s : h.stores()) total += s->counters();
  if (MetricsCounters* e = h.extra()) total += *e;
  return total;
}

bool phase_wanted(const ExperimentConfig& cfg, std::string_view phase) {
  return cfg.phase == "all" || cfg.phase == phase;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.workload.validate();
  if (cfg.phase != "all" && cfg.phase != "load" && cfg.phase != "point" &&
      cfg.phase != "scan" && cfg.phase != "update")
    throw ConfigError("unknown phase: " + cfg.phase);
  if (cfg.pool_pages == 0) throw ConfigError("pool_pages must be positive");

  auto pool = std::make_shared<BufferPool>(cfg.pool_pages);
  std::unique_ptr<Harness> h = make_harness(cfg, pool);
  WorkloadGenerator gen(cfg.workload);
  BaseTables tables = gen.generate();

  ExperimentResult res;
  res.cfg = cfg;

  // Load: bulk ingestion of both tables, measured from cold counters.
  reset_counters(*h);
  auto t0 = std::chrono::steady_clock::now();
  h->bulk_load(tables);
  double load_ms = wall_ms_since(t0);
  std::uint64_t loaded = tables.stock.size() + tables.orderlines.size();
  if (phase_wanted(cfg, "load"))
    res.phases.push_back({"load", loaded, loaded, aggregate_counters(*h), load_ms});

  // Post-load consolidation (LSM only), invisible to every measured phase.
  h->compact_all();
  for (OrderedStore* s : h->stores()) res.space.push_back({s->name(), s->stats()});

  if (phase_wanted(cfg, "point")) {
    std::vector<JoinKey> keys = gen.point_keys(cfg.point_ops);
    auto run_points = [&]() {
      std::uint64_t rows = 0;
      for (const JoinKey& k : keys) {
        auto stream = h->join_key(cfg.join_type, k.warehouse_id, k.item_id);
        while (stream->next()) ++rows;
      }
      return rows;
    };
    run_points();  // warm-up
    reset_counters(*h);
    t0 = std::chrono::steady_clock::now();
    std::uint64_t rows = run_points();
    res.phases.push_back(
        {"point", keys.size(), rows, aggregate_counters(*h), wall_ms_since(t0)});
  }

  if (phase_wanted(cfg, "scan")) {
    auto run_scans = [&]() {
      std::uint64_t rows = 0;
      for (std::uint32_t w = 1; w <= cfg.workload.warehouses; ++w) {
        auto stream = h->join_warehouse(cfg.join_type, w);
        while (stream->next()) ++rows;
      }
      return rows;
    };
    run_scans();  // warm-up
    reset_counters(*h);
    t0 = std::chrono::steady_clock::now();
    std::uint64_t rows = run_scans();
    res.phases.push_back({"scan", cfg.workload.warehouses, rows, aggregate_counters(*h),
                          wall_ms_since(t0)});
  }

  if (phase_wanted(cfg, "update")) {
    reset_counters(*h);
    t0 = std::chrono::steady_clock::now();
    std::uint64_t deltas = 0;
    // Transactions read their targets before writing them, so each round
    // mixes point reads with the index mutations it causes.
    auto apply_all = [&](const std::vector<Delta>& ds) {
      for (const Delta& d : ds) {
        if (d.kind == DeltaKind::Update) {
          if (d.table == SourceTag::Stock) {
            const auto& s = std::get<StockRecord>(*d.old_image);
            h->read_stock(s.warehouse_id, s.item_id);
          } else {
            const auto& o = std::get<OrderlineRecord>(*d.old_image);
            h->read_orderline(o.warehouse_id, o.item_id, o.district_id, o.order_id,
                              o.line_number);
          }
        }
        h->apply(d);
        ++deltas;
      }
    };
    for (std::size_t txn = 0; txn < cfg.update_txns; ++txn) {
      apply_all(gen.next_new_order());
      apply_all(gen.next_delivery());
      // Stock-level check: re-read the lines of recently delivered orders and
      // the stock rows of the distinct items they touch.
      WorkloadGenerator::StockLevelReads sl = gen.stock_level();
      for (const OrderlineRecord& line : sl.lines)
        h->read_orderline(line.warehouse_id, line.item_id, line.district_id,
                          line.order_id, line.line_number);
      for (const JoinKey& k : sl.items) h->read_stock(k.warehouse_id, k.item_id);
    }
    res.phases.push_back(
        {"update", deltas, deltas, aggregate_counters(*h), wall_ms_since(t0)});
  }

  return res;
}

std::vector<ExperimentConfig> default_grid() {
  std::vector<ExperimentConfig> grid;
  const Backend backends[] = {Backend::BTree, Backend::Lsm};
  const std::pair<const char*, std::size_t> pools[] = {{"small", kSmallPoolPages},
                                                       {"large", kLargePoolPages}};
  const double overlaps[] = {0.05, 0.19, 0.5, 1.0};
  const JoinType jts[] = {JoinType::Inner, JoinType::FullOuter};
  const IncludedColumnsPolicy policies[] = {IncludedColumnsPolicy::All,
                                            IncludedColumnsPolicy::Covering,
                                            IncludedColumnsPolicy::Keys};
  const Structure structures[] = {Structure::Merged, Structure::Traditional,
                                  Structure::MatView};
  for (Backend b : backends)
    for (const auto& [label, pages] : pools)
      for (double so : overlaps)
        for (JoinType jt : jts)
          for (IncludedColumnsPolicy p : policies)
            for (Structure st : structures) {
              ExperimentConfig cfg;
              cfg.backend = b;
              cfg.pool_label = label;
              cfg.pool_pages = pages;
              cfg.workload.stock_overlap = so;
              cfg.join_type = jt;
              cfg.policy = p;
              cfg.structure = st;
              grid.push_back(cfg);
            }
  return grid;
}

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void grid_error(std::size_t line, const std::string& what) {
  throw ConfigError("grid line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<ExperimentConfig> parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file: " + path);

  std::vector<Backend> backends = {Backend::BTree, Backend::Lsm};
  std::vector<std::pair<std::string, std::size_t>> pools = {
      {"small", kSmallPoolPages}, {"large", kLargePoolPages}};
  std::vector<double> overlaps = {0.05, 0.19, 0.5, 1.0};
  std::vector<JoinType> jts = {JoinType::Inner, JoinType::FullOuter};
  std::vector<IncludedColumnsPolicy> policies = {IncludedColumnsPolicy::All,
                                                 IncludedColumnsPolicy::Covering,
                                                 IncludedColumnsPolicy::Keys};
  std::vector<Structure> structures = {Structure::Merged, Structure::Traditional,
                                       Structure::MatView};
  ExperimentConfig base;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) grid_error(line_no, "expected key = values");
    std::string key = trim(line.substr(0, eq));
    std::vector<std::string> vals = split_list(line.substr(eq + 1));
    if (vals.empty() || (vals.size() == 1 && vals[0].empty()))
      grid_error(line_no, "no values for key " + key);
    try {
      if (key == "backend") {
        backends.clear();
        for (const auto& v : vals) backends.push_back(backend_from_string(v));
      } else if (key == "pool") {
        pools.clear();
        for (const auto& v : vals) {
          if (v == "small")
            pools.emplace_back(v, kSmallPoolPages);
          else if (v == "large")
            pools.emplace_back(v, kLargePoolPages);
          else
            pools.emplace_back(v, static_cast<std::size_t>(std::stoull(v)));
        }
      } else if (key == "stock_overlap") {
        overlaps.clear();
        for (const auto& v : vals) overlaps.push_back(std::stod(v));
      } else if (key == "join_type") {
        jts.clear();
        for (const auto& v : vals) jts.push_back(join_type_from_string(v));
      } else if (key == "policy") {
        policies.clear();
        for (const auto& v : vals) policies.push_back(policy_from_string(v));
      } else if (key == "structure") {
        structures.clear();
        for (const auto& v : vals) structures.push_back(structure_from_string(v));
      } else if (key == "warehouses") {
        base.workload.warehouses = static_cast<std::uint32_t>(std::stoul(vals.at(0)));
      } else if (key == "items") {
        base.workload.items = static_cast<std::uint32_t>(std::stoul(vals.at(0)));
      } else if (key == "orderlines_per_warehouse") {
        base.workload.orderlines_per_warehouse =
            static_cast<std::uint32_t>(std::stoul(vals.at(0)));
      } else if (key == "seed") {
        base.workload.seed = std::stoull(vals.at(0));
      } else if (key == "point_ops") {
        base.point_ops = static_cast<std::size_t>(std::stoull(vals.at(0)));
      } else if (key == "update_txns") {
        base.update_txns = static_cast<std::size_t>(std::stoull(vals.at(0)));
      } else if (key == "phase") {
        base.phase = vals.at(0);
      } else {
        grid_error(line_no, "unknown key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      grid_error(line_no, "bad value for " + key + " (" + e.what() + ")");
    }
  }

  std::vector<ExperimentConfig> grid;
  for (Backend b : backends)
    for (const auto& [label, pages] : pools)
      for (double so : overlaps)
        for (JoinType jt : jts)
          for (IncludedColumnsPolicy p : policies)
            for (Structure st : structures) {
              ExperimentConfig cfg = base;
              cfg.backend = b;
              cfg.pool_label = label;
              cfg.pool_pages = pages;
              cfg.workload.stock_overlap = so;
              cfg.join_type = jt;
              cfg.policy = p;
              cfg.structure = st;
              grid.push_back(cfg);
            }
  return grid;
}

namespace {

void write_config_cells(std::ostream& out, const ExperimentConfig& cfg) {
  out << to_string(cfg.backend) << ',' << to_string(cfg.structure) << ','
      << to_string(cfg.policy) << ',' << to_string(cfg.join_type) << ','
      << cfg.pool_label << ',' << cfg.pool_pages << ','
      << fmt_double(cfg.workload.stock_overlap) << ',' << cfg.workload.warehouses << ','
      << cfg.workload.items << ',' << cfg.workload.orderlines_per_warehouse << ','
      << cfg.workload.seed << ',' << cfg.point_ops << ',' << cfg.update_txns;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "backend,structure,policy,join_type,pool,pool_pages,stock_overlap,warehouses,"
         "items,orderlines_per_warehouse,seed,point_ops,update_txns,phase,ops,rows,"
         "node_reads,node_writes,node_accesses,buffer_misses,dirty_writebacks,"
         "key_comparisons,entries_scanned,bytes_read,bytes_written,"
         "root_to_leaf_traversals,ops_get,ops_put,ops_replace,ops_erase,ops_scan,"
         "group_buffer_peak,accesses_per_op,misses_per_op,read_share\n";
  for (const ExperimentResult& r : results) {
    for (const PhaseMetrics& ph : r.phases) {
      write_config_cells(out, r.cfg);
      const MetricsCounters& c = ph.counters;
      out << ',' << ph.phase << ',' << ph.ops << ',' << ph.rows << ',' << c.node_reads
          << ',' << c.node_writes << ',' << c.node_accesses() << ',' << c.buffer_misses
          << ',' << c.dirty_writebacks << ',' << c.key_comparisons << ','
          << c.entries_scanned << ',' << c.bytes_read << ',' << c.bytes_written << ','
          << c.root_to_leaf_traversals << ',' << c.ops_get << ',' << c.ops_put << ','
          << c.ops_replace << ',' << c.ops_erase << ',' << c.ops_scan << ','
          << c.group_buffer_peak << ',' << fmt_double(ph.accesses_per_op()) << ','
          << fmt_double(ph.misses_per_op()) << ',' << fmt_double(ph.read_share()) << '\n';
    }
  }
}

void write_ratios_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  // Cell key: everything but the structure. Value: metric per structure.
  struct Cell {
    std::map<std::string, std::uint64_t> by_structure;
  };
  auto metric_of = [](const PhaseMetrics& ph, std::string_view metric) -> std::uint64_t {
    if (metric == "node_accesses") return ph.counters.node_accesses();
    if (metric == "buffer_misses") return ph.counters.buffer_misses;
    if (metric == "bytes_written") return ph.counters.bytes_written;
    return ph.counters.root_to_leaf_traversals;
  };
  const std::string_view metrics[] = {"node_accesses", "buffer_misses", "bytes_written",
                                      "root_to_leaf_traversals"};
  std::map<std::string, Cell> cells;
  std::vector<std::string> order;  // first-seen key order keeps output stable
  for (const ExperimentResult& r : results) {
    for (const PhaseMetrics& ph : r.phases) {
      for (std::string_view metric : metrics) {
        std::string key;
        key += to_string(r.cfg.backend);
        key += ',';
        key += r.cfg.pool_label;
        key += ',';
        key += to_string(r.cfg.policy);
        key += ',';
        key += to_string(r.cfg.join_type);
        key += ',';
        key += fmt_double(r.cfg.workload.stock_overlap);
        key += ',';
        key += ph.phase;
        key += ',';
        key += metric;
        auto [it, fresh] = cells.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.by_structure[std::string(to_string(r.cfg.structure))] =
            metric_of(ph, metric);
      }
    }
  }
  out << "backend,pool,policy,join_type,stock_overlap,phase,metric,merged,traditional,"
         "matview,merged_over_traditional,merged_over_matview\n";
  for (const std::string& key : order) {
    const Cell& cell = cells.at(key);
    auto get = [&](const char* s) -> std::optional<std::uint64_t> {
      auto it = cell.by_structure.find(s);
      if (it == cell.by_structure.end()) return std::nullopt;
      return it->second;
    };
    auto merged = get("merged");
    auto traditional = get("traditional");
    auto matview = get("matview");
    out << key;
    for (const auto& v : {merged, traditional, matview}) {
      out << ',';
      if (v) out << *v;
    }
    out << ',';
    if (merged && traditional && *traditional)
      out << fmt_double(double(*merged) / double(*traditional));
    out << ',';
    if (merged && matview && *matview)
      out << fmt_double(double(*merged) / double(*matview));
    out << '\n';
  }
}

void write_space_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "backend,structure,policy,join_type,pool,stock_overlap,seed,store,entry_count,"
         "payload_bytes,stored_bytes,allocated_bytes,page_count,run_count,height\n";
  for (const ExperimentResult& r : results) {
    StoreStats total;
    auto row = [&](const std::string& store, const StoreStats& st, std::uint32_t height) {
      out << to_string(r.cfg.backend) << ',' << to_string(r.cfg.structure) << ','
          << to_string(r.cfg.policy) << ',' << to_string(r.cfg.join_type) << ','
          << r.cfg.pool_label << ',' << fmt_double(r.cfg.workload.stock_overlap) << ','
          << r.cfg.workload.seed << ',' << store << ',' << st.entry_count << ','
          << st.payload_bytes << ',' << st.stored_bytes << ',' << st.allocated_bytes
          << ',' << st.page_count << ',' << st.run_count << ',' << height << '\n';
    };
    for (const StoreBreakdown& b : r.space) {
      row(b.store, b.stats, b.stats.height);
      total.entry_count += b.stats.entry_count;
      total.payload_bytes += b.stats.payload_bytes;
      total.stored_bytes += b.stats.stored_bytes;
      total.allocated_bytes += b.stats.allocated_bytes;
      total.page_count += b.stats.page_count;
      total.run_count += b.stats.run_count;
    }
    row("total", total, 0);
  }
}

std::string results_json(const std::vector<ExperimentResult>& results) {
  nlohmann::json root;
  root["results"] = nlohmann::json::array();
  for (const ExperimentResult& r : results) {
    nlohmann::json jr;
    jr["id"] = r.cfg.id();
    jr["config"] = {
        {"backend", to_string(r.cfg.backend)},
        {"structure", to_string(r.cfg.structure)},
        {"policy", to_string(r.cfg.policy)},
        {"join_type", to_string(r.cfg.join_type)},
        {"pool", r.cfg.pool_label},
        {"pool_pages", r.cfg.pool_pages},
        {"stock_overlap", r.cfg.workload.stock_overlap},
        {"warehouses", r.cfg.workload.warehouses},
        {"items", r.cfg.workload.items},
        {"orderlines_per_warehouse", r.cfg.workload.orderlines_per_warehouse},
        {"seed", r.cfg.workload.seed},
        {"point_ops", r.cfg.point_ops},
        {"update_txns", r.cfg.update_txns},
        {"phase", r.cfg.phase},
    };
    jr["phases"] = nlohmann::json::array();
    for (const PhaseMetrics& ph : r.phases) {
      const MetricsCounters& c = ph.counters;
      jr["phases"].push_back({
          {"phase", ph.phase},
          {"ops", ph.ops},
          {"rows", ph.rows},
          {"wall_ms", ph.wall_ms},
          {"node_reads", c.node_reads},
          {"node_writes", c.node_writes},
          {"node_accesses", c.node_accesses()},
          {"buffer_misses", c.buffer_misses},
          {"dirty_writebacks", c.dirty_writebacks},
          {"key_comparisons", c.key_comparisons},
          {"entries_scanned", c.entries_scanned},
          {"bytes_read", c.bytes_read},
          {"bytes_written", c.bytes_written},
          {"root_to_leaf_traversals", c.root_to_leaf_traversals},
          {"ops_get", c.ops_get},
          {"ops_put", c.ops_put},
          {"ops_replace", c.ops_replace},
          {"ops_erase", c.ops_erase},
          {"ops_scan", c.ops_scan},
          {"group_buffer_peak", c.group_buffer_peak},
          {"accesses_per_op", ph.accesses_per_op()},
          {"misses_per_op", ph.misses_per_op()},
          {"read_share", ph.read_share()},
      });
    }
    jr["space"] = nlohmann::json::array();
    for (const StoreBreakdown& b : r.space) {
      jr["space"].push_back({
          {"store", b.store},
          {"entry_count", b.stats.entry_count},
          {"payload_bytes", b.stats.payload_bytes},
          {"stored_bytes", b.stats.stored_bytes},
          {"allocated_bytes", b.stats.allocated_bytes},
          {"page_count", b.stats.page_count},
          {"run_count", b.stats.run_count},
          {"height", b.stats.height},
      });
    }
    root["results"].push_back(std::move(jr));
  }
  return root.dump(2) + "\n";
}

namespace {

struct VerifySuite {
  std::ostream& log;
  bool ok = true;

  void check(bool pass, const std::string& what) {
    log << (pass ? "ok   " : "FAIL ") << what << '\n';
    if (!pass) ok = false;
  }
};

const JoinType kAllJoinTypes[] = {JoinType::Inner,     JoinType::LeftOuter,
                                  JoinType::RightOuter, JoinType::FullOuter,
                                  JoinType::LeftSemi,  JoinType::RightSemi};

}  // namespace

bool run_verify(std::uint64_t seed, std::ostream& log) {
  VerifySuite suite{log};
  const double overlaps[] = {0.2, 0.5, 1.0};
  const IncludedColumnsPolicy policies[] = {IncludedColumnsPolicy::All,
                                            IncludedColumnsPolicy::Covering,
                                            IncludedColumnsPolicy::Keys};
  for (int round = 0; round < 3; ++round) {
    WorkloadConfig wc;
    wc.warehouses = 2;
    wc.items = 24;
    wc.orderlines_per_warehouse = 96;
    wc.stock_overlap = overlaps[round];
    wc.seed = seed + round;
    IncludedColumnsPolicy policy = policies[round];

    WorkloadGenerator gen(wc);
    BaseTables tables = gen.generate();
    ShadowDb oracle;
    for (const StockRecord& s : tables.stock) oracle.apply(Delta::insert_stock(s));
    for (const OrderlineRecord& o : tables.orderlines)
      oracle.apply(Delta::insert_orderline(o));
    std::vector<Delta> txn_deltas;
    for (int t = 0; t < 3; ++t)
      for (Delta& d : gen.next_new_order()) txn_deltas.push_back(std::move(d));
    for (int t = 0; t < 2; ++t)
      for (Delta& d : gen.next_delivery()) txn_deltas.push_back(std::move(d));

    for (Backend backend : {Backend::BTree, Backend::Lsm}) {
      auto tag = [&](const std::string& what) {
        std::string s = "seed=" + std::to_string(wc.seed);
        s += " so=" + fmt_double(wc.stock_overlap);
        s += " policy=" + std::string(to_string(policy));
        s += " backend=" + std::string(to_string(backend));
        s += " " + what;
        return s;
      };

      MergedIndex merged(backend, policy, std::make_shared<BufferPool>(kLargePoolPages));
      TraditionalIndexes trad(backend, policy,
                              std::make_shared<BufferPool>(kLargePoolPages));
      MaterializedJoinView mv_inner(backend, policy, JoinType::Inner,
                                    std::make_shared<BufferPool>(kLargePoolPages));
      MaterializedJoinView mv_full(backend, policy, JoinType::FullOuter,
                                   std::make_shared<BufferPool>(kLargePoolPages));
      merged.bulk_load(tables.stock, tables.orderlines);
      trad.bulk_load(tables.stock, tables.orderlines);
      mv_inner.bulk_load(tables.stock, tables.orderlines);
      mv_full.bulk_load(tables.stock, tables.orderlines);

      for (JoinType jt : kAllJoinTypes) {
        auto expected = canonical_multiset(oracle.join(jt, policy));
        suite.check(canonical_multiset(merged.join_all(jt)->drain()) == expected,
                    tag("merged join_all " + std::string(to_string(jt))));
        suite.check(canonical_multiset(trad.join_all(jt)->drain()) == expected,
                    tag("traditional join_all " + std::string(to_string(jt))));
        suite.check(canonical_multiset(mv_full.join_all(jt)->drain()) == expected,
                    tag("matview(full_outer) join_all " + std::string(to_string(jt))));
        if (MaterializedJoinView::can_answer(JoinType::Inner, jt))
          suite.check(canonical_multiset(mv_inner.join_all(jt)->drain()) == expected,
                      tag("matview(inner) join_all " + std::string(to_string(jt))));
      }

      for (std::uint32_t i : {1u, 7u, wc.items, wc.items + 3}) {
        auto expected =
            canonical_multiset(oracle.join_key(JoinType::FullOuter, policy, 1, i));
        suite.check(canonical_multiset(
                        merged.join_key(JoinType::FullOuter, 1, i)->drain()) == expected,
                    tag("merged point(" + std::to_string(i) + ")"));
        suite.check(canonical_multiset(
                        trad.join_key(JoinType::FullOuter, 1, i)->drain()) == expected,
                    tag("traditional point(" + std::to_string(i) + ")"));
        suite.check(canonical_multiset(
                        mv_full.join_key(JoinType::FullOuter, 1, i)->drain()) == expected,
                    tag("matview point(" + std::to_string(i) + ")"));
      }

      ShadowDb mutated = oracle;
      for (const Delta& d : txn_deltas) {
        mutated.apply(d);
        merged.apply(d);
        trad.apply(d);
        mv_inner.apply(d);
        mv_full.apply(d);
      }
      for (JoinType jt : {JoinType::Inner, JoinType::FullOuter}) {
        auto expected = canonical_multiset(mutated.join(jt, policy));
        suite.check(canonical_multiset(merged.join_all(jt)->drain()) == expected,
                    tag("merged after-deltas " + std::string(to_string(jt))));
        suite.check(canonical_multiset(trad.join_all(jt)->drain()) == expected,
                    tag("traditional after-deltas " + std::string(to_string(jt))));
        suite.check(canonical_multiset(mv_full.join_all(jt)->drain()) == expected,
                    tag("matview(full_outer) after-deltas " +
                        std::string(to_string(jt))));
        if (MaterializedJoinView::can_answer(JoinType::Inner, jt))
          suite.check(canonical_multiset(mv_inner.join_all(jt)->drain()) == expected,
                      tag("matview(inner) after-deltas " + std::string(to_string(jt))));
      }
      if (backend == Backend::Lsm) {
        merged.compact();
        auto expected = canonical_multiset(mutated.join(JoinType::FullOuter, policy));
        suite.check(
            canonical_multiset(merged.join_all(JoinType::FullOuter)->drain()) == expected,
            tag("merged after-compaction full_outer"));
      }
    }
  }
  log << (suite.ok ? "verify: all checks passed\n" : "verify: FAILURES\n");
  return suite.ok;
}

}  // namespace midx
