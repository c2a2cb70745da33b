#ifndef SPLICEKIT_HASH_HPP_
#define SPLICEKIT_HASH_HPP_

#include <compare>
#include <string>
#include <string_view>

namespace splicekit {

/// Content digest: 64 lowercase hex chars. Equality of hashes is equality of
/// the canonical documents they were computed from.
struct Hash {
  std::string digest;

  Hash() = default;
  explicit Hash(std::string hex);

  bool empty() const { return digest.empty(); }
  // Short prefix used in install prefixes and listings.
  std::string hash8() const { return digest.substr(0, 8); }

  auto operator<=>(const Hash&) const = default;
};

// The one digest function used everywhere (currently SHA-256). The canonical
// document format is normative; this is its pinned realization.
Hash digest_bytes(std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

}  // namespace splicekit

#endif
