#include "midx/btree.hpp"

#include <algorithm>
#include <cassert>

namespace midx {

BTreeStore::BTreeStore(std::string name, std::shared_ptr<BufferPool> pool)
    : OrderedStore(std::move(name), std::move(pool)) {
  root_ = alloc_page(/*leaf=*/true);
}

std::uint32_t BTreeStore::alloc_page(bool leaf) {
  std::uint32_t id = next_page_no_++;
  Page p;
  p.leaf = leaf;
  pages_.emplace(id, std::move(p));
  ++counters_.node_writes;
  pool_->admit(store_id_, id, counters_);
  return id;
}

void BTreeStore::free_page(std::uint32_t id) {
  pool_->drop(store_id_, id);
  pages_.erase(id);
}

void BTreeStore::visit(std::uint32_t id) {
  ++counters_.node_reads;
  pool_->access(store_id_, id, counters_);
}

void BTreeStore::dirty(std::uint32_t id) {
  ++counters_.node_writes;
  pool_->mark_dirty(store_id_, id, counters_);
}

std::size_t BTreeStore::child_index(const Page& p, std::string_view key) {
  // First separator strictly greater than key; equal separators route right.
  std::size_t lo = 0, hi = p.keys.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    ++counters_.key_comparisons;
    if (p.keys[mid].compare(key) <= 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t BTreeStore::leaf_lower_bound(const Page& p, std::string_view key) {
  std::size_t lo = 0, hi = p.keys.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    ++counters_.key_comparisons;
    if (p.keys[mid].compare(key) < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

BTreeStore::DescentPath BTreeStore::descend(std::string_view key_bytes) {
  ++counters_.root_to_leaf_traversals;
  DescentPath path;
  std::uint32_t id = root_;
  while (true) {
    visit(id);
    Page& p = page(id);
    if (p.leaf) {
      path.leaf = id;
      return path;
    }
    std::size_t ci = child_index(p, key_bytes);
    path.inner.emplace_back(id, ci);
    id = p.kids[ci];
  }
}

BTreeStore::DescentPath BTreeStore::descend_leftmost() {
  ++counters_.root_to_leaf_traversals;
  DescentPath path;
  std::uint32_t id = root_;
  while (true) {
    visit(id);
    Page& p = page(id);
    if (p.leaf) {
      path.leaf = id;
      return path;
    }
    path.inner.emplace_back(id, 0);
    id = p.kids[0];
  }
}

bool BTreeStore::upsert(const EncodedKey& key, std::string value, UpsertMode mode) {
  if (leaf_slot_bytes(key.bytes, value) > kPageCapacity)
    throw EncodingError("entry exceeds page capacity");
  DescentPath path = descend(key.bytes);
  Page& leaf = page(path.leaf);
  std::size_t idx = leaf_lower_bound(leaf, key.bytes);
  bool exists = false;
  if (idx < leaf.keys.size()) {
    ++counters_.key_comparisons;
    exists = leaf.keys[idx] == key.bytes;
  }
  if (!exists && mode == UpsertMode::ReplaceOnly) return false;

  counters_.bytes_written += key.bytes.size() + value.size();
  if (exists) {
    std::size_t old_slot = leaf_slot_bytes(leaf.keys[idx], leaf.vals[idx]);
    std::size_t new_slot = leaf_slot_bytes(key.bytes, value);
    payload_bytes_ += key.bytes.size() + value.size();
    payload_bytes_ -= leaf.keys[idx].size() + leaf.vals[idx].size();
    leaf.used += new_slot;
    leaf.used -= old_slot;
    leaf.vals[idx] = std::move(value);
  } else {
    leaf.used += leaf_slot_bytes(key.bytes, value);
    payload_bytes_ += key.bytes.size() + value.size();
    ++entry_count_;
    leaf.keys.insert(leaf.keys.begin() + idx, key.bytes);
    leaf.vals.insert(leaf.vals.begin() + idx, std::move(value));
  }
  dirty(path.leaf);
  if (leaf.used > kPageCapacity) split_leaf(path.leaf, path);
  return true;
}

void BTreeStore::put(const EncodedKey& key, std::string value) {
  ++counters_.ops_put;
  upsert(key, std::move(value), UpsertMode::Put);
}

bool BTreeStore::replace(const EncodedKey& key, std::string value) {
  ++counters_.ops_replace;
  return upsert(key, std::move(value), UpsertMode::ReplaceOnly);
}

std::optional<std::string> BTreeStore::get(const EncodedKey& key) {
  ++counters_.ops_get;
  DescentPath path = descend(key.bytes);
  Page& leaf = page(path.leaf);
  std::size_t idx = leaf_lower_bound(leaf, key.bytes);
  if (idx >= leaf.keys.size()) return std::nullopt;
  ++counters_.key_comparisons;
  if (leaf.keys[idx] != key.bytes) return std::nullopt;
  counters_.bytes_read += leaf.keys[idx].size() + leaf.vals[idx].size();
  return leaf.vals[idx];
}

void BTreeStore::erase(const EncodedKey& key) {
  ++counters_.ops_erase;
  DescentPath path = descend(key.bytes);
  Page& leaf = page(path.leaf);
  std::size_t idx = leaf_lower_bound(leaf, key.bytes);
  if (idx >= leaf.keys.size()) return;
  ++counters_.key_comparisons;
  if (leaf.keys[idx] != key.bytes) return;

  payload_bytes_ -= leaf.keys[idx].size() + leaf.vals[idx].size();
  leaf.used -= leaf_slot_bytes(leaf.keys[idx], leaf.vals[idx]);
  --entry_count_;
  leaf.keys.erase(leaf.keys.begin() + idx);
  leaf.vals.erase(leaf.vals.begin() + idx);
  dirty(path.leaf);

  if (leaf.keys.empty() && path.leaf != root_) {
    // Unlink from the leaf chain, then drop from the parent.
    std::uint32_t prev = leaf.prev, next = leaf.next;
    if (prev) {
      page(prev).next = next;
      dirty(prev);
    }
    if (next) {
      page(next).prev = prev;
      dirty(next);
    }
    std::uint32_t victim = path.leaf;
    remove_child(path, path.inner.size(), victim);
  }
}

void BTreeStore::remove_child(DescentPath& path, std::size_t level, std::uint32_t child_id) {
  free_page(child_id);
  if (level == 0) {
    // The cascade consumed the whole tree; start over with an empty leaf.
    root_ = alloc_page(/*leaf=*/true);
    height_ = 1;
    return;
  }
  auto [pid, ci] = path.inner[level - 1];
  Page& par = page(pid);
  assert(par.kids[ci] == child_id);
  if (par.kids.size() == 1) {
    // Parent holds nothing else; cascade.
    par.kids.clear();
    remove_child(path, level - 1, pid);
    return;
  }
  std::size_t key_idx = ci > 0 ? ci - 1 : 0;
  par.used -= inner_slot_bytes(par.keys[key_idx]);
  par.keys.erase(par.keys.begin() + key_idx);
  par.kids.erase(par.kids.begin() + ci);
  dirty(pid);
  collapse_root();
}

void BTreeStore::collapse_root() {
  while (true) {
    Page& r = page(root_);
    if (r.leaf || r.kids.size() != 1) return;
    std::uint32_t only = r.kids[0];
    free_page(root_);
    root_ = only;
    --height_;
  }
}

void BTreeStore::split_leaf(std::uint32_t id, DescentPath& path) {
  Page& left = page(id);
  // Byte midpoint, keeping at least one entry per side.
  std::size_t total = left.used;
  std::size_t acc = 0, split = 1;
  for (std::size_t i = 0; i + 1 < left.keys.size(); ++i) {
    acc += leaf_slot_bytes(left.keys[i], left.vals[i]);
    if (acc * 2 >= total) {
      split = i + 1;
      break;
    }
    split = i + 2;
  }
  split = std::clamp<std::size_t>(split, 1, left.keys.size() - 1);

  std::uint32_t right_id = alloc_page(/*leaf=*/true);
  Page& right = page(right_id);
  Page& l = page(id);  // re-fetch: alloc_page may rehash
  right.keys.assign(std::make_move_iterator(l.keys.begin() + split),
                    std::make_move_iterator(l.keys.end()));
  right.vals.assign(std::make_move_iterator(l.vals.begin() + split),
                    std::make_move_iterator(l.vals.end()));
  l.keys.resize(split);
  l.vals.resize(split);
  std::size_t right_used = 0;
  for (std::size_t i = 0; i < right.keys.size(); ++i)
    right_used += leaf_slot_bytes(right.keys[i], right.vals[i]);
  right.used = right_used;
  l.used -= right_used;

  right.next = l.next;
  right.prev = id;
  if (l.next) {
    page(l.next).prev = right_id;
    dirty(l.next);
  }
  l.next = right_id;

  insert_into_parent(path, path.inner.size(), right.keys.front(), right_id);
}

void BTreeStore::split_inner(std::uint32_t id, std::size_t path_index, DescentPath& path) {
  Page& node = page(id);
  std::size_t total = node.used;
  std::size_t acc = 0, split = 1;
  for (std::size_t i = 0; i + 2 < node.keys.size(); ++i) {
    acc += inner_slot_bytes(node.keys[i]);
    if (acc * 2 >= total) {
      split = i + 1;
      break;
    }
    split = i + 2;
  }
  split = std::clamp<std::size_t>(split, 1, node.keys.size() - 2);
  // keys[split] is promoted; [0,split) stay left, (split,...) go right.
  std::string promoted = std::move(node.keys[split]);

  std::uint32_t right_id = alloc_page(/*leaf=*/false);
  Page& right = page(right_id);
  Page& n = page(id);
  right.keys.assign(std::make_move_iterator(n.keys.begin() + split + 1),
                    std::make_move_iterator(n.keys.end()));
  right.kids.assign(n.kids.begin() + split + 1, n.kids.end());
  n.keys.resize(split);
  n.kids.resize(split + 1);
  std::size_t right_used = 0;
  for (const auto& k : right.keys) right_used += inner_slot_bytes(k);
  right.used = right_used;
  n.used -= right_used + inner_slot_bytes(promoted);

  insert_into_parent(path, path_index, std::move(promoted), right_id);
}

void BTreeStore::insert_into_parent(DescentPath& path, std::size_t level, std::string sep,
                                    std::uint32_t right_id) {
  if (level == 0) {
    std::uint32_t left_id = (height_ == 1) ? path.leaf : path.inner.front().first;
    std::uint32_t new_root = alloc_page(/*leaf=*/false);
    Page& r = page(new_root);
    r.used = inner_slot_bytes(sep);
    r.keys.push_back(std::move(sep));
    r.kids = {left_id, right_id};
    root_ = new_root;
    ++height_;
    return;
  }
  auto [pid, ci] = path.inner[level - 1];
  Page& par = page(pid);
  par.used += inner_slot_bytes(sep);
  par.keys.insert(par.keys.begin() + ci, std::move(sep));
  par.kids.insert(par.kids.begin() + ci + 1, right_id);
  dirty(pid);
  if (par.used > kPageCapacity) split_inner(pid, level - 1, path);
}

class BTreeCursor final : public Cursor {
 public:
  BTreeCursor(BTreeStore* store, std::uint32_t leaf, std::size_t idx, std::string upper)
      : store_(store), page_(leaf), idx_(idx), upper_(std::move(upper)) {}

  std::optional<Entry> next() override {
    while (page_ != 0) {
      const BTreeStore::Page& p = store_->page(page_);
      if (idx_ >= p.keys.size()) {
        std::uint32_t nxt = p.next;
        page_ = nxt;
        idx_ = 0;
        if (page_ != 0) store_->visit(page_);
        continue;
      }
      const std::string& k = p.keys[idx_];
      if (!upper_.empty()) {
        ++store_->counters_.key_comparisons;
        if (k.compare(upper_) >= 0) {
          page_ = 0;
          return std::nullopt;
        }
      }
      Entry e{EncodedKey{k}, p.vals[idx_]};
      ++idx_;
      ++store_->counters_.entries_scanned;
      store_->counters_.bytes_read += e.key.bytes.size() + e.value.size();
      return e;
    }
    return std::nullopt;
  }

 private:
  BTreeStore* store_;
  std::uint32_t page_;
  std::size_t idx_;
  std::string upper_;
};

std::unique_ptr<Cursor> BTreeStore::scan(const EncodedKey& lower, const EncodedKey& upper) {
  ++counters_.ops_scan;
  DescentPath path = lower.bytes.empty() ? descend_leftmost() : descend(lower.bytes);
  std::size_t idx = lower.bytes.empty() ? 0 : leaf_lower_bound(page(path.leaf), lower.bytes);
  return std::make_unique<BTreeCursor>(this, path.leaf, idx, upper.bytes);
}

void BTreeStore::bulk_load(std::vector<Entry> batch) {
  counters_.ops_put += batch.size();
  if (batch.empty()) return;

  std::stable_sort(batch.begin(), batch.end(), [this](const Entry& a, const Entry& b) {
    ++counters_.key_comparisons;
    return a.key.bytes < b.key.bytes;
  });
  // Last occurrence of a duplicate key wins.
  std::vector<Entry> dedup;
  dedup.reserve(batch.size());
  for (auto& e : batch) {
    if (!dedup.empty() && dedup.back().key == e.key)
      dedup.back() = std::move(e);
    else
      dedup.push_back(std::move(e));
  }

  if (entry_count_ == 0) {
    build_from_sorted(std::move(dedup));
  } else {
    for (auto& e : dedup) upsert(e.key, std::move(e.value), UpsertMode::Put);
  }
}

void BTreeStore::build_from_sorted(std::vector<Entry>&& entries) {
  // Replace the empty tree with packed leaves and bottom-up inner levels.
  free_page(root_);
  struct Built {
    std::uint32_t id;
    std::string first_key;
  };
  std::vector<Built> level;

  // Leave headroom in packed leaves so post-load inserts do not split on
  // first touch.
  const std::size_t fill_limit = kPageCapacity * 9 / 10;
  std::uint32_t cur = alloc_page(/*leaf=*/true);
  level.push_back({cur, entries.front().key.bytes});
  for (auto& e : entries) {
    std::size_t slot = leaf_slot_bytes(e.key.bytes, e.value);
    if (slot > kPageCapacity) throw EncodingError("entry exceeds page capacity");
    Page* p = &page(cur);
    if (p->used + slot > fill_limit && !p->keys.empty()) {
      std::uint32_t nxt = alloc_page(/*leaf=*/true);
      page(cur).next = nxt;
      page(nxt).prev = cur;
      cur = nxt;
      level.push_back({cur, e.key.bytes});
      p = &page(cur);
    }
    entry_count_ += 1;
    payload_bytes_ += e.key.bytes.size() + e.value.size();
    counters_.bytes_written += e.key.bytes.size() + e.value.size();
    p->used += slot;
    p->keys.push_back(std::move(e.key.bytes));
    p->vals.push_back(std::move(e.value));
  }

  height_ = 1;
  while (level.size() > 1) {
    std::vector<Built> parents;
    std::uint32_t node = alloc_page(/*leaf=*/false);
    parents.push_back({node, level.front().first_key});
    page(node).kids.push_back(level.front().id);
    for (std::size_t i = 1; i < level.size(); ++i) {
      std::size_t slot = inner_slot_bytes(level[i].first_key);
      Page* p = &page(node);
      if (p->used + slot > fill_limit && !p->keys.empty()) {
        node = alloc_page(/*leaf=*/false);
        parents.push_back({node, level[i].first_key});
        page(node).kids.push_back(level[i].id);
        continue;
      }
      p->used += slot;
      p->keys.push_back(level[i].first_key);
      p->kids.push_back(level[i].id);
    }
    level = std::move(parents);
    ++height_;
  }
  root_ = level.front().id;
}

void BTreeStore::compact() {
  throw UnsupportedError("compact is not defined for the b-tree backend");
}

StoreStats BTreeStore::stats() const {
  StoreStats s;
  s.entry_count = entry_count_;
  s.payload_bytes = payload_bytes_;
  s.stored_bytes = payload_bytes_;
  s.page_count = pages_.size();
  s.allocated_bytes = static_cast<std::uint64_t>(pages_.size()) * kPageSize;
  s.height = height_;
  return s;
}

BTreeStore::ValidationReport BTreeStore::validate(bool check_occupancy) const {
  ValidationReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.message.empty()) rep.message = std::move(msg);
  };

  std::size_t max_slot = 0;
  for (const auto& [id, p] : pages_) {
    if (p.leaf) {
      for (std::size_t i = 0; i < p.keys.size(); ++i)
        max_slot = std::max(max_slot, leaf_slot_bytes(p.keys[i], p.vals[i]));
    } else {
      for (const auto& k : p.keys) max_slot = std::max(max_slot, inner_slot_bytes(k));
    }
  }

  std::vector<std::uint32_t> leaves_by_tree;
  std::uint64_t seen_entries = 0;

  // Recursive bound-checked walk.
  auto walk = [&](auto&& self, std::uint32_t id, std::uint32_t depth,
                  const std::string* lo, const std::string* hi) -> std::uint32_t {
    auto it = pages_.find(id);
    if (it == pages_.end()) {
      fail("dangling page id " + std::to_string(id));
      return depth;
    }
    const Page& p = it->second;
    for (std::size_t i = 0; i + 1 < p.keys.size(); ++i)
      if (p.keys[i] >= p.keys[i + 1]) fail("unsorted keys in page " + std::to_string(id));
    if (!p.keys.empty()) {
      if (lo && p.keys.front() < *lo) fail("lower bound violated in page " + std::to_string(id));
      if (hi && p.keys.back() >= *hi) fail("upper bound violated in page " + std::to_string(id));
    }
    std::size_t used = 0;
    if (p.leaf) {
      if (p.keys.size() != p.vals.size()) fail("leaf arity mismatch");
      for (std::size_t i = 0; i < p.keys.size(); ++i)
        used += leaf_slot_bytes(p.keys[i], p.vals[i]);
      seen_entries += p.keys.size();
      leaves_by_tree.push_back(id);
      if (used != p.used) fail("leaf byte accounting off in page " + std::to_string(id));
      // The rightmost page per level (hi == nullptr) may stay underfull: bulk
      // builds leave a short tail and nothing ever merges it away.
      if (check_occupancy && id != root_ && hi != nullptr) {
        if (p.used + 2 * max_slot < kPageCapacity / 2)
          fail("underfull leaf " + std::to_string(id));
      }
      return depth;
    }
    if (p.kids.size() != p.keys.size() + 1) fail("inner arity mismatch");
    for (const auto& k : p.keys) used += inner_slot_bytes(k);
    if (used != p.used) fail("inner byte accounting off in page " + std::to_string(id));
    if (check_occupancy && id != root_ && hi != nullptr) {
      if (p.used + 2 * max_slot < kPageCapacity / 2)
        fail("underfull inner node " + std::to_string(id));
    }
    std::uint32_t leaf_depth = 0;
    for (std::size_t i = 0; i < p.kids.size(); ++i) {
      const std::string* clo = (i == 0) ? lo : &p.keys[i - 1];
      const std::string* chi = (i == p.keys.size()) ? hi : &p.keys[i];
      std::uint32_t d = self(self, p.kids[i], depth + 1, clo, chi);
      if (i == 0)
        leaf_depth = d;
      else if (d != leaf_depth)
        fail("leaves at unequal depth under page " + std::to_string(id));
    }
    return leaf_depth;
  };
  std::uint32_t depth = walk(walk, root_, 1, nullptr, nullptr);
  if (depth != height_) fail("height bookkeeping off");
  if (seen_entries != entry_count_) fail("entry count bookkeeping off");

  // Leaf chain must enumerate the same leaves in the same order.
  std::vector<std::uint32_t> leaves_by_chain;
  std::uint32_t lf = root_;
  while (!page(lf).leaf) lf = page(lf).kids.front();
  if (page(lf).prev != 0) fail("first leaf has prev link");
  while (lf != 0) {
    leaves_by_chain.push_back(lf);
    std::uint32_t nxt = page(lf).next;
    if (nxt != 0 && page(nxt).prev != lf) fail("broken prev link");
    lf = nxt;
  }
  if (leaves_by_chain != leaves_by_tree) fail("leaf chain does not match tree order");
  if (pages_.size() != [&] {
        // every page must be reachable
        std::size_t count = 0;
        auto count_walk = [&](auto&& self, std::uint32_t id) -> void {
          ++count;
          const Page& p = page(id);
          if (!p.leaf)
            for (auto kid : p.kids) self(self, kid);
        };
        count_walk(count_walk, root_);
        return count;
      }())
    fail("unreachable pages exist");
  return rep;
}

}  // namespace midx
