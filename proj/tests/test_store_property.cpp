#include <map>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "midx/store.hpp"
#include "midx/workload.hpp"

using namespace midx;

namespace {

EncodedKey rand_key(Rng& rng) {
  // Mixed layouts exercise variable key lengths, including shared prefixes.
  std::string text(rng.uniform(0, 6), static_cast<char>('a' + rng.uniform(0, 2)));
  return encode_key({std::int64_t(rng.uniform(0, 60)), text,
                     rng.uniform(0, 1) ? SourceTag::Orderline : SourceTag::Stock});
}

std::vector<Entry> drain_cursor(Cursor& cur) {
  std::vector<Entry> out;
  while (auto e = cur.next()) out.push_back(std::move(*e));
  return out;
}

void expect_equal_range(OrderedStore& store,
                        const std::map<std::string, std::string>& model,
                        const std::string& lo, const std::string& hi) {
  auto got = drain_cursor(*store.scan(EncodedKey{lo}, EncodedKey{hi}));
  auto begin = model.lower_bound(lo);
  auto end = hi.empty() ? model.end() : model.lower_bound(hi);
  std::size_t i = 0;
  for (auto it = begin; it != end; ++it, ++i) {
    REQUIRE(i < got.size());
    CHECK(got[i].key.bytes == it->first);
    CHECK(got[i].value == it->second);
  }
  CHECK(i == got.size());
}

}  // namespace

TEST_CASE("both backends agree with a std::map under one op stream") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    CAPTURE(seed);
    auto pool = std::make_shared<BufferPool>(kLargePoolPages);
    LsmOptions lsm_opts;
    lsm_opts.memtable_threshold_bytes = 1024;
    auto bt = make_store(Backend::BTree, "bt", pool);
    auto lsm = make_store(Backend::Lsm, "lsm", pool, lsm_opts);
    std::map<std::string, std::string> model;
    Rng rng(seed);

    for (int step = 0; step < 4000; ++step) {
      EncodedKey k = rand_key(rng);
      switch (rng.uniform(0, 6)) {
        case 0:
        case 1: {
          // Empty values are legal: the keys policy stores them everywhere.
          std::string v(rng.uniform(0, 40), 'p');
          bt->put(k, v);
          lsm->put(k, v);
          model[k.bytes] = v;
          break;
        }
        case 2: {
          std::string v(rng.uniform(0, 40), 'q');
          bool hb = bt->replace(k, v);
          bool hl = lsm->replace(k, v);
          CHECK(hb == hl);
          CHECK(hb == (model.count(k.bytes) > 0));
          if (hb) model[k.bytes] = v;
          break;
        }
        case 3: {
          bt->erase(k);
          lsm->erase(k);
          model.erase(k.bytes);
          break;
        }
        case 4: {
          auto gb = bt->get(k);
          auto gl = lsm->get(k);
          CHECK(gb == gl);
          auto it = model.find(k.bytes);
          CHECK(gb.has_value() == (it != model.end()));
          if (gb && it != model.end()) CHECK(*gb == it->second);
          break;
        }
        default: {
          EncodedKey k2 = rand_key(rng);
          std::string lo = std::min(k.bytes, k2.bytes);
          std::string hi = std::max(k.bytes, k2.bytes);
          expect_equal_range(*bt, model, lo, hi);
          expect_equal_range(*lsm, model, lo, hi);
          break;
        }
      }
      if (step == 2000) {
        lsm->compact();  // mid-stream consolidation must not change contents
        expect_equal_range(*lsm, model, "", "");
      }
    }

    expect_equal_range(*bt, model, "", "");
    expect_equal_range(*lsm, model, "", "");
    CHECK(bt->stats().entry_count == model.size());
    CHECK(lsm->stats().entry_count == model.size());
  }
}

TEST_CASE("scan_prefix returns exactly the prefixed keys") {
  auto pool = std::make_shared<BufferPool>(kLargePoolPages);
  for (Backend b : {Backend::BTree, Backend::Lsm}) {
    CAPTURE(to_string(b));
    auto store = make_store(b, "s", pool);
    for (std::uint32_t w = 1; w <= 3; ++w)
      for (std::uint32_t i = 0; i < 20; ++i)
        store->put(encode_key({std::int64_t(w), std::int64_t(i)}), "v");

    auto got = drain_cursor(*store->scan_prefix(encode_key({std::int64_t(2)})));
    CHECK(got.size() == 20);
    for (const Entry& e : got) {
      ByteReader r(e.key.bytes);
      CHECK(r.take_u32() == 2);
    }

    CHECK(drain_cursor(*store->scan_all()).size() == 60);
    CHECK(drain_cursor(*store->scan_prefix(encode_key({std::int64_t(9)}))).empty());
  }
}

TEST_CASE("store construction registers with the pool it was given") {
  CHECK_THROWS_AS(make_store(Backend::BTree, "x", nullptr), ConfigError);

  auto pool = std::make_shared<BufferPool>(16);
  auto a = make_store(Backend::BTree, "a", pool);
  auto b = make_store(Backend::Lsm, "b", pool);
  a->put(encode_key({std::int64_t(1)}), "v");
  b->put(encode_key({std::int64_t(1)}), "v");
  CHECK(a->name() == "a");
  CHECK(b->name() == "b");
  CHECK(&a->pool() == pool.get());
  CHECK(a->backend() == Backend::BTree);
  CHECK(b->backend() == Backend::Lsm);
}

TEST_CASE("backend names round-trip") {
  CHECK(backend_from_string(to_string(Backend::BTree)) == Backend::BTree);
  CHECK(backend_from_string(to_string(Backend::Lsm)) == Backend::Lsm);
  CHECK_THROWS_AS(backend_from_string("rope"), ConfigError);
}
