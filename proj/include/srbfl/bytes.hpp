#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace srbfl {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

inline constexpr Digest kZeroDigest{};

struct DigestHash {
  std::size_t operator()(const Digest& d) const {
    std::uint64_t v;
    static_assert(sizeof(v) <= sizeof(Digest));
    __builtin_memcpy(&v, d.data(), sizeof(v));
    return static_cast<std::size_t>(v);
  }
};

// Canonical byte serialization used for every digest in the ledger:
// fixed field order, big-endian fixed-width integers, IEEE-754 binary64
// big-endian reals. Documented in docs/FORMATS.md; changing it changes
// every chain hash.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void raw(const std::uint8_t* data, std::size_t n) {
    out_.insert(out_.end(), data, data + n);
  }

  void digest(const Digest& d) { raw(d.data(), d.size()); }

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

inline std::string to_hex(const std::uint8_t* data, std::size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(kHex[data[i] >> 4]);
    s.push_back(kHex[data[i] & 0xF]);
  }
  return s;
}

inline std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }
inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

inline std::optional<int> hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return std::nullopt;
}

inline std::optional<Bytes> from_hex(const std::string& s) {
  if (s.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    const auto hi = hex_nibble(s[i]);
    const auto lo = hex_nibble(s[i + 1]);
    if (!hi || !lo) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((*hi << 4) | *lo));
  }
  return out;
}

inline std::optional<Digest> digest_from_hex(const std::string& s) {
  const auto b = from_hex(s);
  if (!b || b->size() != 32) return std::nullopt;
  Digest d;
  std::copy(b->begin(), b->end(), d.begin());
  return d;
}

}  // namespace srbfl
