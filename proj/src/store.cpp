#include "midx/store.hpp"

#include "midx/btree.hpp"
#include "midx/lsm.hpp"

namespace midx {

std::string_view to_string(Backend b) {
  return b == Backend::BTree ? "btree" : "lsm";
}

Backend backend_from_string(std::string_view s) {
  if (s == "btree") return Backend::BTree;
  if (s == "lsm") return Backend::Lsm;
  throw ConfigError("unknown backend: " + std::string(s));
}

OrderedStore::OrderedStore(std::string name, std::shared_ptr<BufferPool> pool)
    : name_(std::move(name)), pool_(std::move(pool)) {
  if (!pool_) throw ConfigError("store requires a buffer pool");
  store_id_ = pool_->register_store();
}

std::unique_ptr<Cursor> OrderedStore::scan_prefix(const EncodedKey& prefix) {
  EncodedKey upper{prefix_upper_bound(prefix.bytes)};
  return scan(prefix, upper);
}

std::unique_ptr<Cursor> OrderedStore::scan_all() {
  return scan(EncodedKey{}, EncodedKey{});
}

std::unique_ptr<OrderedStore> make_store(Backend backend, std::string name,
                                         std::shared_ptr<BufferPool> pool,
                                         LsmOptions lsm_options) {
  if (backend == Backend::BTree)
    return std::make_unique<BTreeStore>(std::move(name), std::move(pool));
  return std::make_unique<LsmStore>(std::move(name), std::move(pool), lsm_options);
}

}  // namespace midx
