#ifndef SPLICEKIT_VERSION_HPP_
#define SPLICEKIT_VERSION_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace splicekit {

/// A dotted-decimal version, e.g. 1.14.5. Ordering is lexicographic on the
/// component list; a missing trailing component sorts lower (1.2 < 1.2.0).
class Version {
 public:
  Version() = default;
  explicit Version(std::vector<std::uint64_t> components);

  // Throws ParseError on anything that is not dotted non-negative decimals.
  static Version parse(const std::string& text);

  const std::vector<std::uint64_t>& components() const { return components_; }
  std::string str() const;

  // True when this version's components are a leading prefix of v's
  // (every version is a prefix of itself).
  bool is_prefix_of(const Version& v) const;

  // Smallest version greater than every version prefixed by *this:
  // bump(1.2) = 1.3, bump(1.4.2) = 1.4.3.
  Version bump() const;

  std::strong_ordering operator<=>(const Version& other) const;
  bool operator==(const Version& other) const { return components_ == other.components_; }

 private:
  std::vector<std::uint64_t> components_;
};

/// Version requirement from the `@` sigil. `exact-or-prefix @v` accepts any
/// version v is a component-prefix of; `range @lo:hi` accepts lo <= v with the
/// hi bound prefix-inclusive, so `@x.y` is exactly `@x.y:x.y`.
struct VersionConstraint {
  enum class Kind { exact_or_prefix, range };

  Kind kind = Kind::range;
  std::optional<Version> lo;
  std::optional<Version> hi;

  static VersionConstraint exact_or_prefix(Version v);
  static VersionConstraint range(std::optional<Version> lo, std::optional<Version> hi);

  bool accepts(const Version& v) const;

  // Set-inclusion check: every version accepted by this is accepted by other.
  bool subset_of(const VersionConstraint& other) const;

  // Intersection. Throws ConflictError when empty.
  VersionConstraint intersect(const VersionConstraint& other) const;

  // Canonical sigil form: "@1.2", "@1.0:1.5", "@1.5:", "@:2.0".
  std::string str() const;

  bool operator==(const VersionConstraint& other) const;
};

}  // namespace splicekit

#endif
