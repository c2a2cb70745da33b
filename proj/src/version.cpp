#include "splicekit/version.hpp"

#include <algorithm>
#include <charconv>

#include "splicekit/errors.hpp"

namespace splicekit {

Version::Version(std::vector<std::uint64_t> components) : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error("version must have at least one component");
  }
}

Version Version::parse(const std::string& text) {
  std::vector<std::uint64_t> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t dot = text.find('.', pos);
    std::string_view piece(text.data() + pos, (dot == std::string::npos ? text.size() : dot) - pos);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
    if (ec != std::errc() || ptr != piece.data() + piece.size() || piece.empty()) {
      throw ParseError("malformed version: '" + text + "'", pos, {"digits"});
    }
    parts.push_back(value);
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return Version(std::move(parts));
}

std::string Version::str() const {
  std::string out;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(components_[i]);
  }
  return out;
}

bool Version::is_prefix_of(const Version& v) const {
  if (components_.size() > v.components_.size()) return false;
  return std::equal(components_.begin(), components_.end(), v.components_.begin());
}

Version Version::bump() const {
  auto parts = components_;
  parts.back() += 1;
  return Version(std::move(parts));
}

std::strong_ordering Version::operator<=>(const Version& other) const {
  std::size_t n = std::min(components_.size(), other.components_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = components_[i] <=> other.components_[i]; c != 0) return c;
  }
  return components_.size() <=> other.components_.size();
}

VersionConstraint VersionConstraint::exact_or_prefix(Version v) {
  VersionConstraint c;
  c.kind = Kind::exact_or_prefix;
  c.lo = v;
  c.hi = std::move(v);
  return c;
}

VersionConstraint VersionConstraint::range(std::optional<Version> lo, std::optional<Version> hi) {
  VersionConstraint c;
  c.kind = Kind::range;
  if (lo && hi && *hi < *lo) {
    throw ConflictError("version range lower bound " + lo->str() + " exceeds upper bound " + hi->str());
  }
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  return c;
}

bool VersionConstraint::accepts(const Version& v) const {
  if (lo && v < *lo) return false;
  if (hi && !(v <= *hi || hi->is_prefix_of(v))) return false;
  return true;
}

namespace {

// The accepted set of any constraint is the half-open interval
// [lo, hi.bump()) on the version order; open ends map to infinities.
bool upper_less(const std::optional<Version>& a, const std::optional<Version>& b) {
  if (!b) return a.has_value();
  if (!a) return false;
  return a->bump() < b->bump();
}

}  // namespace

bool VersionConstraint::subset_of(const VersionConstraint& other) const {
  if (other.lo) {
    if (!lo || *lo < *other.lo) return false;
  }
  if (other.hi) {
    if (!hi || upper_less(other.hi, hi)) return false;
  }
  return true;
}

VersionConstraint VersionConstraint::intersect(const VersionConstraint& other) const {
  std::optional<Version> new_lo = lo;
  if (other.lo && (!new_lo || *new_lo < *other.lo)) new_lo = other.lo;

  std::optional<Version> new_hi = hi;
  if (other.hi && (!new_hi || upper_less(other.hi, new_hi))) new_hi = other.hi;

  if (new_lo && new_hi) {
    // Non-empty iff lo itself falls below the (prefix-inclusive) upper bound.
    if (!(*new_lo <= *new_hi || new_hi->is_prefix_of(*new_lo))) {
      throw ConflictError("empty version intersection of " + str() + " and " + other.str());
    }
  }

  VersionConstraint out;
  if (new_lo && new_hi && *new_lo == *new_hi) {
    out.kind = Kind::exact_or_prefix;
  } else {
    out.kind = Kind::range;
  }
  out.lo = std::move(new_lo);
  out.hi = std::move(new_hi);
  return out;
}

std::string VersionConstraint::str() const {
  if (kind == Kind::exact_or_prefix && lo) return "@" + lo->str();
  std::string out = "@";
  if (lo) out += lo->str();
  out += ':';
  if (hi) out += hi->str();
  return out;
}

bool VersionConstraint::operator==(const VersionConstraint& other) const {
  return kind == other.kind && lo == other.lo && hi == other.hi;
}

}  // namespace splicekit
