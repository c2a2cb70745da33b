#ifndef SPLICEKIT_BUILDCACHE_HPP_
#define SPLICEKIT_BUILDCACHE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splicekit/spec.hpp"

namespace splicekit {

enum class EntrySource { built, rewired };

struct CacheEntry {
  ConcreteSpec spec;  // full closure rooted at root_hash
  Hash root_hash;
  std::optional<std::string> artifact;  // mock binary bytes; present iff installable
  std::string created_at;
  EntrySource source = EntrySource::built;
};

/// One flattened attribute row of a reusable spec: (entry hash, attribute,
/// args...). Dependencies appear as "depends_on" rows plus per-child "hash"
/// rows, which is the hook the solver uses to decide imposition per-dependency.
struct FactRow {
  Hash hash;
  std::string attr;
  std::vector<std::string> args;

  bool operator==(const FactRow&) const = default;
};

/// Content-addressed store of concrete specs and their artifacts.
/// Layout: <dir>/index.json plus <dir>/artifacts/<hash>.bin. Single writer;
/// the index is rewritten atomically on push (temp file + rename).
class BuildCache {
 public:
  // In-memory cache with no persistence.
  BuildCache() = default;
  // Opens or creates an on-disk store.
  explicit BuildCache(std::filesystem::path dir);

  // Persists the spec's whole closure: one entry per closure node (so every
  // sub-DAG is itself reusable); the artifact attaches to the root entry.
  // Idempotent on identical content. Throws HashMismatchError when stored
  // node hashes disagree with recomputation.
  Hash push(const ConcreteSpec& spec, std::optional<std::string> artifact = std::nullopt,
            EntrySource source = EntrySource::built);

  const CacheEntry* lookup(const Hash& h) const;
  std::vector<Hash> by_name(const std::string& name) const;
  const std::map<Hash, CacheEntry>& entries() const { return by_hash_; }
  std::size_t size() const { return by_hash_.size(); }

  // Flattened per-node attribute rows for every entry, deterministic order.
  std::vector<FactRow> solver_facts() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  void load();
  void save() const;

  std::filesystem::path dir_;  // empty for in-memory caches
  std::map<Hash, CacheEntry> by_hash_;
  std::map<std::string, std::vector<Hash>> by_name_;
};

}  // namespace splicekit

#endif
