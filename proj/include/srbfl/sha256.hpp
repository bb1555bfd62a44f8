#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "srbfl/bytes.hpp"

namespace srbfl {

// FIPS 180-4 SHA-256. Self-contained so chain digests carry no dependency
// on a system crypto library; checked against the NIST vectors in tests.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset();
  void update(const std::uint8_t* data, std::size_t n);
  void update(const Bytes& b) { update(b.data(), b.size()); }
  Digest finish();

 private:
  void process_block(const std::uint8_t* block);

  std::uint32_t state_[8];
  std::uint64_t total_len_;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_;
};

Digest sha256(const std::uint8_t* data, std::size_t n);

inline Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

inline Digest sha256(std::string_view s) {
  return sha256(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

}  // namespace srbfl
