#pragma once

// Shared primitives: the stable 64-bit hash every fingerprint and id in the
// project is built on, hex encoding, and the error/diagnostic types.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace sgp {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// Incremental FNV-1a (64-bit) over raw bytes. All persisted hashes
/// (function ids, fingerprints, subtree hashes, window hashes) come from
/// this one function so results are identical across runs and platforms.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kFnvPrime;
    }
    return *this;
  }

  Fnv1a64& update_byte(unsigned char c) {
    state_ ^= c;
    state_ *= kFnvPrime;
    return *this;
  }

  /// Feeds a 64-bit value as 8 little-endian bytes.
  Fnv1a64& update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      update_byte(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    }
    return *this;
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  return Fnv1a64().update(bytes).digest();
}

/// Lowercase, zero-padded 16-char hex. The wire form of every 64-bit hash.
inline std::string to_hex16(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

class error;

inline std::uint64_t parse_hex16(std::string_view s);

/// Error with a stable machine-readable code ("MalformedLine", "NMismatch",
/// ...) next to the human message. The CLI maps any sgp::error to exit 3.
class error : public std::runtime_error {
 public:
  error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline std::uint64_t parse_hex16(std::string_view s) {
  if (s.size() != 16) {
    throw error("MalformedHash", "expected 16 hex chars, got '" + std::string(s) + "'");
  }
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else {
      throw error("MalformedHash", "invalid hex char in '" + std::string(s) + "'");
    }
  }
  return v;
}

/// Non-fatal issue reported alongside a result (recovered lexer errors,
/// skipped files, degenerate normalizations). line is 0 when not applicable.
struct Diagnostic {
  std::string code;
  std::string message;
  int line = 0;

  bool operator==(const Diagnostic&) const = default;
};

}  // namespace sgp
