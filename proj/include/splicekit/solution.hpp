#ifndef SPLICEKIT_SOLUTION_HPP_
#define SPLICEKIT_SOLUTION_HPP_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "splicekit/concretizer.hpp"

namespace splicekit {

/// Per-dependency splice choices for one reused spec. A dependency absent
/// from the map keeps the cached imposition untouched (subject to transitive
/// tie-breaking when a sibling is spliced). A present dependency either
/// carries nested choices for its own dependencies (replacement unset: the
/// dependency itself is kept) or is replaced by the given cached spec. The
/// choice repeats at every reused node, mirroring the per-hash imposition
/// rows of the cache encoding.
struct SpliceAction;
using SplicePlan = std::map<std::string, SpliceAction>;

struct SpliceAction {
  Hash replacement;  // empty: keep this dependency, apply `nested` below it
  SplicePlan nested;

  bool is_splice() const { return !replacement.empty(); }
  bool operator==(const SpliceAction&) const = default;
};

/// The realized closure of one reused entry after applying a splice plan:
/// top-level splices run transitively in dependency-name order, nested ones
/// intransitively against the evolving DAG. No-op steps are dropped.
struct Realization {
  ConcreteSpec spec;
  std::vector<SpliceDecision> decisions;
  // Pre-splice subgraphs referenced by new provenance links, keyed by hash.
  std::map<Hash, ConcreteSpec> intermediates;
};

Realization realize_reuse(const BuildCache& cache, const Hash& entry, const SplicePlan& plan);

// Rebuilds the plan tree of one top-level parent from recorded decisions
// (used to re-execute provenance). Decisions under kept dependencies get
// their Keep chain reconstructed from the cached closure.
SplicePlan plan_from_decisions(const std::vector<SpliceDecision>& decisions, const Hash& top_parent,
                               const BuildCache& cache);

/// Enumerates splice plans for a cached entry in deterministic order (the
/// empty plan first; per dependency Keep before Splice; candidates by
/// ascending hash). max_candidates 0 means unlimited. `filter`, when set,
/// may shrink each dependency's candidate list before enumeration.
using CandidateFilter = std::function<std::vector<SpliceCandidate>(std::vector<SpliceCandidate>)>;

void enumerate_splice_plans(const BuildCache& cache, const Repo& repo, const Hash& entry,
                            std::size_t max_candidates,
                            const std::function<void(const SplicePlan&)>& emit,
                            const CandidateFilter& filter = {});

/// Drops forbidden replacements and collapses candidates that are provably
/// interchangeable — identical closure below the root and attribute-identical
/// root (version recency, deviations, os/target, provided virtuals) — to the
/// lowest-hash representative. Names in `pinned_names` (anything the request
/// or a directive can address directly) are never collapsed. The replacement
/// hash is the tie-breaker for competing candidates, so dropping the higher
/// hashes of a class cannot change the optimum.
std::vector<SpliceCandidate> collapse_candidates(std::vector<SpliceCandidate> candidates,
                                                 const BuildCache& cache, const Repo& repo,
                                                 const std::set<std::string>& pinned_names,
                                                 const std::set<std::string>& forbidden);

/// Names the request or any directive can constrain directly; used to decide
/// which splice candidates must stay individually addressable.
std::set<std::string> addressable_names(const Repo& repo, const AbstractSpec& request);

// --- shared solution accounting ----------------------------------------------

/// Values a freshly built node may assign per variant: the declared default
/// plus every value the instance mentions for that package/variant (request
/// constraints, directive targets anywhere in the repo, the package's own
/// when-clauses). Keeps builds from dodging dependencies by flipping variants
/// nobody asked about. Deterministic order, default first.
using VariantDomains = std::map<std::pair<std::string, std::string>, std::vector<VariantValue>>;
VariantDomains variant_domains(const Repo& repo, const AbstractSpec& request);

/// Objective recomputed from a finished solution (the normative definition;
/// search-time increments must agree with this).
Objective objective_of(const ConcreteSpec& spec, const Repo& repo,
                       const std::set<std::string>& to_build,
                       const std::vector<SpliceDecision>& splices);

/// Total deterministic order for objective ties: per-node version recency,
/// provider choices (preference rank, then name), then node hashes. Lower
/// key wins.
std::string solution_sort_key(const SolveResult& result, const Repo& repo,
                              const SolveOptions& opts);

/// virtual -> provider package name, derived from the active provides
/// directives over the link-run closure.
std::map<std::string, std::string> derive_providers(const ConcreteSpec& spec, const Repo& repo);

struct RequestCheckFailure {
  std::string message;
};

/// End-of-solve checks shared by both solvers: request presence/satisfaction
/// over the closure, forbidden packages, os/target homogeneity, one active
/// provider per virtual, fresh-node directive satisfaction.
std::vector<RequestCheckFailure> check_solution(const ConcreteSpec& spec,
                                                const AbstractSpec& request, const Repo& repo,
                                                const SolveOptions& opts,
                                                const std::set<std::string>& to_build,
                                                const VariantDomains* domains = nullptr);

/// Names of virtuals actively provided by this node (version/variant gated).
std::vector<std::string> provided_virtuals(const Repo& repo, const ConcreteNode& node);

}  // namespace splicekit

#endif
