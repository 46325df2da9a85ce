#include "midx/codec.hpp"

#include <limits>

namespace midx {

ComponentKind kind_of(const KeyComponent& c) {
  if (std::holds_alternative<std::int64_t>(c)) return ComponentKind::U32;
  if (std::holds_alternative<std::string>(c)) return ComponentKind::Text;
  return ComponentKind::Tag;
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_text(std::string& out, std::string_view v) {
  if (v.size() > kMaxTextComponent)
    throw EncodingError("text component exceeds " + std::to_string(kMaxTextComponent) + " bytes");
  for (char c : v) {
    if (c == '\0') {
      out.push_back('\0');
      out.push_back('\x01');
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\0');
  out.push_back('\0');
}

void put_tag(std::string& out, SourceTag tag) {
  out.push_back(static_cast<char>(tag));
}

std::uint32_t ByteReader::take_u32() {
  if (pos_ + 4 > bytes_.size()) throw EncodingError("truncated u32 component");
  auto b = [&](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]));
  };
  std::uint32_t v = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  pos_ += 4;
  return v;
}

std::string ByteReader::take_text() {
  std::string out;
  while (true) {
    if (pos_ >= bytes_.size()) throw EncodingError("unterminated text component");
    char c = bytes_[pos_++];
    if (c != '\0') {
      out.push_back(c);
      continue;
    }
    if (pos_ >= bytes_.size()) throw EncodingError("dangling escape in text component");
    char esc = bytes_[pos_++];
    if (esc == '\0') return out;          // sentinel
    if (esc == '\x01') out.push_back('\0');  // escaped zero byte
    else throw EncodingError("bad escape byte in text component");
  }
}

SourceTag ByteReader::take_tag() {
  if (pos_ >= bytes_.size()) throw EncodingError("truncated tag component");
  auto raw = static_cast<unsigned char>(bytes_[pos_++]);
  if (raw > 1) throw EncodingError("bad source tag byte");
  return static_cast<SourceTag>(raw);
}

EncodedKey encode_key(std::span<const KeyComponent> components) {
  EncodedKey key;
  for (const auto& c : components) {
    switch (kind_of(c)) {
      case ComponentKind::U32: {
        auto v = std::get<std::int64_t>(c);
        if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
          throw EncodingError("integer component out of range: " + std::to_string(v));
        put_u32(key.bytes, static_cast<std::uint32_t>(v));
        break;
      }
      case ComponentKind::Text:
        put_text(key.bytes, std::get<std::string>(c));
        break;
      case ComponentKind::Tag:
        put_tag(key.bytes, std::get<SourceTag>(c));
        break;
    }
  }
  return key;
}

EncodedKey encode_key(std::initializer_list<KeyComponent> components) {
  return encode_key(std::span<const KeyComponent>(components.begin(), components.size()));
}

std::vector<KeyComponent> decode_key(const EncodedKey& key,
                                     std::span<const ComponentKind> kinds) {
  ByteReader r(key.bytes);
  std::vector<KeyComponent> out;
  out.reserve(kinds.size());
  for (ComponentKind k : kinds) {
    switch (k) {
      case ComponentKind::U32:
        out.emplace_back(static_cast<std::int64_t>(r.take_u32()));
        break;
      case ComponentKind::Text:
        out.emplace_back(r.take_text());
        break;
      case ComponentKind::Tag:
        out.emplace_back(r.take_tag());
        break;
    }
  }
  if (!r.done()) throw EncodingError("trailing bytes after last component");
  return out;
}

std::string prefix_upper_bound(std::string_view prefix) {
  std::string out(prefix);
  while (!out.empty()) {
    auto last = static_cast<unsigned char>(out.back());
    if (last != 0xFF) {
      out.back() = static_cast<char>(last + 1);
      return out;
    }
    out.pop_back();
  }
  return out;  // empty: unbounded
}

}  // namespace midx
