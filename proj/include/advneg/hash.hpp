#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace advneg {

// 64-bit FNV-1a. Used for content digests in manifests and for deriving
// per-item RNG seeds; not a cryptographic hash.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string digest_hex(std::string_view bytes) {
  return to_hex(fnv1a64(bytes));
}

// Mixes a string tag into a base seed so sibling tasks get independent,
// reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int i = 0; i < 8; ++i) {
    h ^= (base >> (8 * i)) & 0xff;
    h *= 0x100000001b3ull;
  }
  return fnv1a64(tag, h);
}

}  // namespace advneg
