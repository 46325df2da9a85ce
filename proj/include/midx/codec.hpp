#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "midx/errors.hpp"

namespace midx {

// Which table an entry inside a merged structure came from. The byte values
// are part of the key format: Stock sorts before Orderline within a join-key
// group.
enum class SourceTag : std::uint8_t { Stock = 0, Orderline = 1 };

// A key image whose bytewise (unsigned, memcmp-style) order equals the
// componentwise order of the values it was built from.
struct EncodedKey {
  std::string bytes;

  friend auto operator<=>(const EncodedKey& a, const EncodedKey& b) {
    return a.bytes.compare(b.bytes) <=> 0;
  }
  friend bool operator==(const EncodedKey& a, const EncodedKey& b) = default;
};

enum class ComponentKind : std::uint8_t { U32, Text, Tag };

// Integers are carried as int64 so out-of-range inputs can be rejected
// instead of silently truncated.
using KeyComponent = std::variant<std::int64_t, std::string, SourceTag>;

ComponentKind kind_of(const KeyComponent& c);

inline constexpr std::size_t kMaxTextComponent = 255;

// Low-level append/parse primitives. All multi-byte integers are big-endian
// unsigned; text is terminated by the 0x00 0x00 sentinel with embedded zero
// bytes escaped as 0x00 0x01.
void put_u32(std::string& out, std::uint32_t v);
void put_text(std::string& out, std::string_view v);
void put_tag(std::string& out, SourceTag tag);

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t take_u32();
  std::string take_text();
  SourceTag take_tag();
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

EncodedKey encode_key(std::span<const KeyComponent> components);
EncodedKey encode_key(std::initializer_list<KeyComponent> components);

// Parses bytes produced by encode_key for the given component layout.
std::vector<KeyComponent> decode_key(const EncodedKey& key,
                                     std::span<const ComponentKind> kinds);

// Smallest key strictly greater than every key having `prefix` as a byte
// prefix; empty result means "no upper bound" (prefix was all 0xFF).
std::string prefix_upper_bound(std::string_view prefix);

}  // namespace midx
