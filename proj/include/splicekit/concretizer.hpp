#ifndef SPLICEKIT_CONCRETIZER_HPP_
#define SPLICEKIT_CONCRETIZER_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "splicekit/buildcache.hpp"
#include "splicekit/repo.hpp"
#include "splicekit/spec.hpp"

namespace splicekit {

struct SolveOptions {
  bool reuse_enabled = true;
  bool splice_enabled = false;  // requires reuse_enabled
  std::size_t max_candidates_per_node = 0;  // 0 = unlimited
  std::uint64_t deterministic_seed = 0;
  std::string default_os = "linux";
  std::string default_target = "x86_64";
  // Names that must not appear in the solved link-run closure.
  std::set<std::string> forbidden_packages;
  // Per-virtual provider preference; alphabetical otherwise.
  std::map<std::string, std::vector<std::string>> provider_preference;
};

/// Lexicographic objective, lower is better, compared field by field in
/// declaration order: builds dominate everything, splices are minimized last
/// (so a splice is always preferred to a build but never gratuitous).
struct Objective {
  std::uint64_t builds = 0;
  std::uint64_t version_penalty = 0;
  std::uint64_t default_deviation = 0;
  std::uint64_t splice_count = 0;

  auto operator<=>(const Objective&) const = default;
  std::string str() const;
};

struct SpliceDecision {
  Hash parent_hash;  // reused spec whose dependency is replaced
  std::string replaced_name;
  Hash replaced_hash;
  Hash replacement_hash;
  bool transitive = true;

  bool operator==(const SpliceDecision&) const = default;
};

struct SolveStats {
  std::uint64_t decisions = 0;
  std::uint64_t backtracks = 0;
  double wall_ms = 0.0;
};

struct SolveResult {
  ConcreteSpec spec;
  std::set<Hash> reused;
  std::set<std::string> to_build;
  std::vector<SpliceDecision> splices;  // in canonical application order
  Objective objective;
  SolveStats stats;
  // Specs referenced by provenance chains that are not cache entries
  // (pre-splice intermediates), for rewiring.
  std::map<Hash, ConcreteSpec> provenance_specs;

  std::string to_json() const;
};

/// Resolves the request into an optimal concrete spec: versions, variants,
/// providers, cache reuse, and (when enabled) splice synthesis. Complete
/// depth-first search with constraint propagation and branch-and-bound on the
/// lexicographic objective; ties broken deterministically (newest version,
/// alphabetical provider, lowest hash).
///
/// Throws UnsatisfiableError (with a best-effort conflict core) and
/// UnknownPackageError.
SolveResult concretize(const AbstractSpec& request, const Repo& repo, const BuildCache& cache,
                       const SolveOptions& opts = {});

/// Brute-force reference solver: exhaustively enumerates concrete assignments
/// and reuse/splice selections, validates each, returns the lexicographic
/// minimum under the same tie-breaking. Deliberately shares no search
/// machinery with concretize(). Throws InstanceTooLargeError beyond
/// desk-scale bounds (8 packages, 4 versions, 3 boolean variants, 32 entries).
SolveResult oracle_solve(const AbstractSpec& request, const Repo& repo, const BuildCache& cache,
                         const SolveOptions& opts = {});

struct SpliceCandidate {
  Hash replacement;  // cached spec that can be spliced in
  const CanSplice* directive;
};

/// Every cached spec whose package declares a can_splice directive whose
/// target matches `node` and whose when-clause is satisfied by the cached
/// spec's root. Sorted by replacement hash.
std::vector<SpliceCandidate> splice_candidates(const ConcreteNode& node, const Repo& repo,
                                               const BuildCache& cache);

/// Deterministic rendering of reuse/splice/build decisions.
std::string explain(const SolveResult& result);
std::string explain_json(const SolveResult& result);

}  // namespace splicekit

#endif
