#include "midx/lsm.hpp"

#include <algorithm>

namespace midx {

LsmStore::LsmStore(std::string name, std::shared_ptr<BufferPool> pool, LsmOptions options)
    : OrderedStore(std::move(name), std::move(pool)),
      options_(options),
      mem_(CountingLess{&counters_}) {
  if (options_.memtable_threshold_bytes == 0 || options_.compaction_trigger_runs < 2)
    throw ConfigError("bad LSM options");
}

void LsmStore::memtable_upsert(const std::string& key, std::optional<std::string> value) {
  std::size_t slot = key.size() + (value ? value->size() : 0) + kSlotOverhead;
  if (slot > kPageCapacity) throw EncodingError("entry exceeds page capacity");
  auto it = mem_.find(key);
  if (it != mem_.end()) {
    mem_bytes_ -= key.size() + (it->second ? it->second->size() : 0) + kSlotOverhead;
    it->second = std::move(value);
    mem_bytes_ += slot;
  } else {
    mem_.emplace(key, std::move(value));
    mem_bytes_ += slot;
  }
}

void LsmStore::maybe_flush(bool allow_auto_compaction) {
  if (mem_bytes_ < options_.memtable_threshold_bytes) return;
  flush_memtable();
  if (allow_auto_compaction && runs_.size() >= options_.compaction_trigger_runs)
    merge_runs();
}

void LsmStore::flush_memtable() {
  if (mem_.empty()) return;
  Run run;
  RunPage cur;
  auto seal = [&]() {
    cur.page_no = next_page_no_++;
    ++counters_.node_writes;
    pool_->admit(store_id_, cur.page_no, counters_);
    for (const auto& e : cur.entries) counters_.bytes_written += e.key.size() + e.value.size();
    run.fences.push_back(cur.entries.front().key);
    run.entry_count += cur.entries.size();
    run.byte_size += cur.bytes -
                     cur.entries.size() * kSlotOverhead;  // key+value bytes only
    run.pages.push_back(std::move(cur));
    cur = RunPage{};
  };
  for (const auto& [k, v] : mem_) {
    std::size_t slot = k.size() + (v ? v->size() : 0) + kSlotOverhead;
    if (!cur.entries.empty() && cur.bytes + slot > kPageCapacity) seal();
    cur.entries.push_back(RunEntry{k, v ? *v : std::string(), !v.has_value()});
    if (!v) ++run.tombstones;
    cur.bytes += slot;
  }
  if (!cur.entries.empty()) seal();
  runs_.push_back(std::move(run));
  mem_.clear();
  mem_bytes_ = 0;
}

void LsmStore::merge_runs() {
  if (runs_.empty()) return;

  struct Pos {
    std::size_t run, page, entry;
  };
  std::vector<Pos> pos(runs_.size());
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    pos[i] = {i, 0, 0};
    ++counters_.node_reads;
    pool_->access(store_id_, runs_[i].pages[0].page_no, counters_);
  }
  auto exhausted = [&](const Pos& p) { return p.page >= runs_[p.run].pages.size(); };
  auto current = [&](const Pos& p) -> const RunEntry& {
    return runs_[p.run].pages[p.page].entries[p.entry];
  };
  auto advance = [&](Pos& p) {
    ++p.entry;
    if (p.entry >= runs_[p.run].pages[p.page].entries.size()) {
      p.entry = 0;
      ++p.page;
      if (!exhausted(p)) {
        ++counters_.node_reads;
        pool_->access(store_id_, runs_[p.run].pages[p.page].page_no, counters_);
      }
    }
  };

  Run out;
  RunPage cur;
  auto seal = [&]() {
    cur.page_no = next_page_no_++;
    ++counters_.node_writes;
    pool_->admit(store_id_, cur.page_no, counters_);
    for (const auto& e : cur.entries) counters_.bytes_written += e.key.size() + e.value.size();
    out.fences.push_back(cur.entries.front().key);
    out.entry_count += cur.entries.size();
    out.byte_size += cur.bytes - cur.entries.size() * kSlotOverhead;
    out.pages.push_back(std::move(cur));
    cur = RunPage{};
  };

  while (true) {
    // Smallest key, newest run wins ties; ties in older runs are consumed.
    int winner = -1;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      if (exhausted(pos[i])) continue;
      if (winner < 0) {
        winner = static_cast<int>(i);
        continue;
      }
      ++counters_.key_comparisons;
      int c = current(pos[i]).key.compare(current(pos[winner]).key);
      if (c <= 0) winner = static_cast<int>(i);  // ties: later (newer) run replaces
    }
    if (winner < 0) break;
    const RunEntry winning = current(pos[winner]);
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      if (static_cast<int>(i) == winner || exhausted(pos[i])) continue;
      ++counters_.key_comparisons;
      if (current(pos[i]).key == winning.key) advance(pos[i]);
    }
    advance(pos[winner]);
    if (winning.tombstone) continue;  // full merge drops tombstones
    std::size_t slot = slot_bytes(winning.key, winning.value);
    if (!cur.entries.empty() && cur.bytes + slot > kPageCapacity) seal();
    cur.entries.push_back(winning);
    cur.bytes += slot;
  }
  if (!cur.entries.empty()) seal();

  for (const auto& r : runs_)
    for (const auto& p : r.pages) pool_->drop(store_id_, p.page_no);
  runs_.clear();
  if (!out.pages.empty()) runs_.push_back(std::move(out));
}

void LsmStore::put(const EncodedKey& key, std::string value) {
  ++counters_.ops_put;
  ++counters_.root_to_leaf_traversals;
  counters_.bytes_written += 0;  // persisted bytes are counted at flush time
  memtable_upsert(key.bytes, std::move(value));
  maybe_flush(/*allow_auto_compaction=*/true);
}

void LsmStore::erase(const EncodedKey& key) {
  ++counters_.ops_erase;
  ++counters_.root_to_leaf_traversals;
  memtable_upsert(key.bytes, std::nullopt);
  maybe_flush(/*allow_auto_compaction=*/true);
}

std::optional<std::optional<std::string>> LsmStore::lookup(const EncodedKey& key) {
  auto mit = mem_.find(key.bytes);
  if (mit != mem_.end()) return mit->second;
  for (auto rit = runs_.rbegin(); rit != runs_.rend(); ++rit) {
    const Run& run = *rit;
    // Last page whose fence is <= key.
    std::size_t lo = 0, hi = run.fences.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      ++counters_.key_comparisons;
      if (run.fences[mid].compare(key.bytes) <= 0)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo == 0) continue;  // key below this run's range
    const RunPage& pg = run.pages[lo - 1];
    ++counters_.node_reads;
    pool_->access(store_id_, pg.page_no, counters_);
    std::size_t a = 0, b = pg.entries.size();
    while (a < b) {
      std::size_t mid = (a + b) / 2;
      ++counters_.key_comparisons;
      if (pg.entries[mid].key.compare(key.bytes) < 0)
        a = mid + 1;
      else
        b = mid;
    }
    if (a < pg.entries.size()) {
      ++counters_.key_comparisons;
      if (pg.entries[a].key == key.bytes) {
        if (pg.entries[a].tombstone) return std::optional<std::optional<std::string>>(std::nullopt);
        return std::optional<std::optional<std::string>>(pg.entries[a].value);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> LsmStore::get(const EncodedKey& key) {
  ++counters_.ops_get;
  ++counters_.root_to_leaf_traversals;
  auto found = lookup(key);
  if (!found || !*found) return std::nullopt;
  counters_.bytes_read += key.bytes.size() + (*found)->size();
  return **found;
}

bool LsmStore::replace(const EncodedKey& key, std::string value) {
  ++counters_.ops_replace;
  ++counters_.root_to_leaf_traversals;
  auto found = lookup(key);
  if (!found || !*found) return false;
  memtable_upsert(key.bytes, std::move(value));
  maybe_flush(/*allow_auto_compaction=*/true);
  return true;
}

void LsmStore::bulk_load(std::vector<Entry> batch) {
  counters_.ops_put += batch.size();
  for (auto& e : batch) {
    memtable_upsert(e.key.bytes, std::move(e.value));
    maybe_flush(/*allow_auto_compaction=*/false);
  }
}

void LsmStore::compact() {
  flush_memtable();
  if (runs_.empty()) return;
  if (runs_.size() == 1 && runs_[0].tombstones == 0) return;  // already canonical
  merge_runs();
}

class LsmCursor final : public Cursor {
 public:
  LsmCursor(LsmStore* store, const EncodedKey& lower, std::string upper)
      : store_(store), upper_(std::move(upper)) {
    mem_it_ = lower.bytes.empty() ? store_->mem_.begin()
                                  : store_->mem_.lower_bound(lower.bytes);
    run_pos_.reserve(store_->runs_.size());
    for (std::size_t i = 0; i < store_->runs_.size(); ++i) run_pos_.push_back(position(i, lower));
  }

  std::optional<Entry> next() override {
    while (true) {
      int winner = -1;  // -2 = memtable
      const std::string* min_key = nullptr;
      if (mem_it_ != store_->mem_.end()) {
        winner = -2;
        min_key = &mem_it_->first;
      }
      for (std::size_t i = 0; i < run_pos_.size(); ++i) {
        if (exhausted(run_pos_[i])) continue;
        const std::string& k = current(run_pos_[i]).key;
        if (!min_key) {
          winner = static_cast<int>(i);
          min_key = &k;
          continue;
        }
        ++store_->counters_.key_comparisons;
        int c = k.compare(*min_key);
        if (c < 0 || (c == 0 && winner != -2 && static_cast<int>(i) > winner)) {
          winner = static_cast<int>(i);
          min_key = &k;
        }
      }
      if (!min_key) return std::nullopt;
      if (!upper_.empty()) {
        ++store_->counters_.key_comparisons;
        if (min_key->compare(upper_) >= 0) return std::nullopt;
      }

      // Pull the winning version; consume shadowed versions of the same key.
      std::string key = *min_key;
      std::string value;
      bool tombstone = false;
      if (winner == -2) {
        tombstone = !mem_it_->second.has_value();
        if (!tombstone) value = *mem_it_->second;
        consume_mem();
      } else {
        const LsmStore::RunEntry& e = current(run_pos_[winner]);
        tombstone = e.tombstone;
        value = e.value;
        consume_run(run_pos_[winner], e.key, e.value);
      }
      if (mem_it_ != store_->mem_.end()) {
        ++store_->counters_.key_comparisons;
        if (mem_it_->first == key) consume_mem();
      }
      for (auto& p : run_pos_) {
        if (exhausted(p)) continue;
        ++store_->counters_.key_comparisons;
        if (current(p).key == key) consume_run(p, current(p).key, current(p).value);
      }
      if (tombstone) continue;
      return Entry{EncodedKey{std::move(key)}, std::move(value)};
    }
  }

 private:
  struct Pos {
    std::size_t run;
    std::size_t page;
    std::size_t entry;
  };

  bool exhausted(const Pos& p) const { return p.page >= store_->runs_[p.run].pages.size(); }
  const LsmStore::RunEntry& current(const Pos& p) const {
    return store_->runs_[p.run].pages[p.page].entries[p.entry];
  }

  void consume_mem() {
    ++store_->counters_.entries_scanned;
    store_->counters_.bytes_read +=
        mem_it_->first.size() + (mem_it_->second ? mem_it_->second->size() : 0);
    ++mem_it_;
  }

  void consume_run(Pos& p, const std::string& k, const std::string& v) {
    ++store_->counters_.entries_scanned;
    store_->counters_.bytes_read += k.size() + v.size();
    ++p.entry;
    if (p.entry >= store_->runs_[p.run].pages[p.page].entries.size()) {
      p.entry = 0;
      ++p.page;
      if (!exhausted(p)) visit_page(p);
    }
  }

  void visit_page(const Pos& p) {
    ++store_->counters_.node_reads;
    store_->pool_->access(store_->store_id_, store_->runs_[p.run].pages[p.page].page_no,
                          store_->counters_);
  }

  Pos position(std::size_t run_idx, const EncodedKey& lower) {
    const LsmStore::Run& run = store_->runs_[run_idx];
    Pos p{run_idx, 0, 0};
    if (!lower.bytes.empty()) {
      std::size_t lo = 0, hi = run.fences.size();
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        ++store_->counters_.key_comparisons;
        if (run.fences[mid].compare(lower.bytes) <= 0)
          lo = mid + 1;
        else
          hi = mid;
      }
      p.page = lo > 0 ? lo - 1 : 0;
    }
    if (exhausted(p)) return p;
    visit_page(p);
    if (!lower.bytes.empty()) {
      const auto& entries = store_->runs_[run_idx].pages[p.page].entries;
      std::size_t a = 0, b = entries.size();
      while (a < b) {
        std::size_t mid = (a + b) / 2;
        ++store_->counters_.key_comparisons;
        if (entries[mid].key.compare(lower.bytes) < 0)
          a = mid + 1;
        else
          b = mid;
      }
      p.entry = a;
      if (p.entry >= entries.size()) {
        p.entry = 0;
        ++p.page;
        if (!exhausted(p)) visit_page(p);
      }
    }
    return p;
  }

  LsmStore* store_;
  std::string upper_;
  LsmStore::Memtable::iterator mem_it_;
  std::vector<Pos> run_pos_;
};

std::unique_ptr<Cursor> LsmStore::scan(const EncodedKey& lower, const EncodedKey& upper) {
  ++counters_.ops_scan;
  ++counters_.root_to_leaf_traversals;
  return std::make_unique<LsmCursor>(this, lower, upper.bytes);
}

void LsmStore::for_each_visible(
    const std::function<void(const std::string&, const std::string&)>& fn) const {
  struct Src {
    std::size_t run, page, entry;
  };
  std::vector<Src> pos;
  for (std::size_t i = 0; i < runs_.size(); ++i) pos.push_back({i, 0, 0});
  auto exhausted = [&](const Src& p) { return p.page >= runs_[p.run].pages.size(); };
  auto current = [&](const Src& p) -> const RunEntry& {
    return runs_[p.run].pages[p.page].entries[p.entry];
  };
  auto advance = [&](Src& p) {
    ++p.entry;
    if (p.entry >= runs_[p.run].pages[p.page].entries.size()) {
      p.entry = 0;
      ++p.page;
    }
  };
  auto mem_it = mem_.begin();
  while (true) {
    int winner = -1;
    const std::string* min_key = nullptr;
    if (mem_it != mem_.end()) {
      winner = -2;
      min_key = &mem_it->first;
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (exhausted(pos[i])) continue;
      const std::string& k = current(pos[i]).key;
      if (!min_key || k < *min_key ||
          (k == *min_key && winner != -2 && static_cast<int>(i) > winner)) {
        winner = static_cast<int>(i);
        min_key = &k;
      }
    }
    if (!min_key) return;
    std::string key = *min_key;
    bool tombstone = false;
    std::string value;
    if (winner == -2) {
      tombstone = !mem_it->second.has_value();
      if (!tombstone) value = *mem_it->second;
      ++mem_it;
    } else {
      tombstone = current(pos[winner]).tombstone;
      value = current(pos[winner]).value;
      advance(pos[winner]);
    }
    if (mem_it != mem_.end() && mem_it->first == key) ++mem_it;
    for (auto& p : pos)
      if (!exhausted(p) && current(p).key == key) advance(p);
    if (!tombstone) fn(key, value);
  }
}

StoreStats LsmStore::stats() const {
  StoreStats s;
  for_each_visible([&](const std::string& k, const std::string& v) {
    ++s.entry_count;
    s.payload_bytes += k.size() + v.size();
  });
  s.stored_bytes = mem_bytes_ > mem_.size() * kSlotOverhead
                       ? mem_bytes_ - mem_.size() * kSlotOverhead
                       : 0;
  for (const auto& r : runs_) {
    s.stored_bytes += r.byte_size;
    s.page_count += r.pages.size();
  }
  s.allocated_bytes = s.page_count * kPageSize;
  if (mem_bytes_ > 0) s.allocated_bytes += ((mem_bytes_ + kPageSize - 1) / kPageSize) * kPageSize;
  s.run_count = runs_.size();
  return s;
}

}  // namespace midx
