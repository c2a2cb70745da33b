#ifndef SPLICEKIT_SPLICER_HPP_
#define SPLICEKIT_SPLICER_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "splicekit/spec.hpp"

namespace splicekit {

class BuildCache;

/// Provenance link from a spliced node to the spec it was derived from.
struct ProvenancePair {
  Hash spliced_hash;
  Hash build_spec_hash;
};

/// Resolves specs by root hash (build cache, in-memory overlays, or both).
using SpecLookup = std::function<std::optional<ConcreteSpec>(const Hash&)>;

SpecLookup lookup_in(const BuildCache& cache);
SpecLookup overlay(const std::map<Hash, ConcreteSpec>& extras, SpecLookup fallback);

/// Replaces the link-run node named `target_name` (default: the replacement's
/// root package name) with the replacement's root.
///
/// transitive: for every package name shared between the remaining root graph
/// and the replacement's link-run closure, the replacement's copy wins.
/// intransitive: the root's copies win; the replacement is re-pointed at them
/// and thereby becomes a spliced node itself.
///
/// Every node whose link-run children changed gets build_spec_hash set to its
/// pre-splice hash and loses its build edges; untouched nodes keep their
/// hashes. Splicing the identical node is a no-op.
///
/// Throws NoTargetError, AmbiguousTargetError, WouldCycleError.
ConcreteSpec splice(const ConcreteSpec& root, const ConcreteSpec& replacement, bool transitive,
                    const std::optional<std::string>& target_name = std::nullopt);

/// For each spliced node: old child hash (in its original build spec) ->
/// new child hash (same-name node in the spliced DAG), composed across
/// provenance chains, identity entries omitted. Throws MissingProvenanceError.
std::map<Hash, std::map<Hash, Hash>> rewiring_map(const ConcreteSpec& spliced,
                                                  const SpecLookup& store);

}  // namespace splicekit

#endif
