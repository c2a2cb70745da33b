#ifndef SPLICEKIT_SPEC_HPP_
#define SPLICEKIT_SPEC_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "splicekit/hash.hpp"
#include "splicekit/version.hpp"

namespace splicekit {

/// Boolean or string-token variant value.
struct VariantValue {
  std::variant<bool, std::string> value;

  VariantValue() : value(false) {}
  VariantValue(bool b) : value(b) {}
  VariantValue(std::string s) : value(std::move(s)) {}
  VariantValue(const char* s) : value(std::string(s)) {}

  bool is_bool() const { return std::holds_alternative<bool>(value); }
  bool as_bool() const { return std::get<bool>(value); }
  const std::string& as_string() const { return std::get<std::string>(value); }
  std::string str() const;

  bool operator==(const VariantValue&) const = default;
  auto operator<=>(const VariantValue&) const = default;
};

enum class EdgeKind { link_run, build, any };

std::string edge_kind_name(EdgeKind k);
EdgeKind edge_kind_from_name(const std::string& name);

/// Constraints on a single node: any subset of the spec attributes.
struct NodeConstraints {
  std::string name;  // package or virtual name; may be empty for anonymous when-clauses
  std::optional<VersionConstraint> version;
  std::map<std::string, VariantValue> variants;
  std::optional<std::string> os;
  std::optional<std::string> target;

  bool empty_constraints() const {
    return !version && variants.empty() && !os && !target;
  }

  bool operator==(const NodeConstraints&) const = default;
};

/// A user request: root constraints plus dependency constraints over the
/// solved closure.
struct AbstractSpec {
  NodeConstraints root;
  std::vector<std::pair<NodeConstraints, EdgeKind>> dependencies;

  bool operator==(const AbstractSpec&) const = default;
};

/// A fully-resolved node. `hash` is the dag_hash of the subgraph below it;
/// `build_spec_hash` is set iff the node was produced by splicing.
struct ConcreteNode {
  std::string name;
  Version version;
  std::map<std::string, VariantValue> variants;
  std::string os;
  std::string target;
  Hash hash;
  std::optional<Hash> build_spec_hash;

  bool spliced() const { return build_spec_hash.has_value(); }

  bool operator==(const ConcreteNode&) const = default;
};

/// A concrete spec DAG: nodes keyed by hash, two edge sets.
struct ConcreteSpec {
  std::map<Hash, ConcreteNode> nodes;
  Hash root;
  std::set<std::pair<Hash, Hash>> link_run_edges;
  std::set<std::pair<Hash, Hash>> build_edges;

  const ConcreteNode& node(const Hash& h) const;
  const ConcreteNode& root_node() const { return node(root); }

  // Direct children of a node, sorted by (name, hash).
  std::vector<Hash> link_run_children(const Hash& parent) const;
  std::vector<Hash> build_children(const Hash& parent) const;

  // Nodes reachable from `from` via link-run edges only, `from` included.
  std::set<Hash> link_run_closure(const Hash& from) const;
  // Nodes reachable via either edge kind.
  std::set<Hash> full_closure(const Hash& from) const;

  // The sub-spec rooted at `from` (both edge kinds).
  ConcreteSpec subspec(const Hash& from) const;

  bool operator==(const ConcreteSpec&) const = default;
};

// --- satisfaction and merging ------------------------------------------------

// True iff every field present in `constraint` is matched by the candidate.
// Names must be comparable already (virtual resolution happens in the caller).
bool satisfies(const ConcreteNode& candidate, const NodeConstraints& constraint);

// Refinement check between constraint sets: candidate's constraints are at
// least as strong as `constraint` on every field `constraint` mentions.
bool satisfies(const NodeConstraints& candidate, const NodeConstraints& constraint);

// Conjunction of two constraint sets over the same name. Throws ConflictError.
NodeConstraints merge_constraints(const NodeConstraints& a, const NodeConstraints& b);

// --- hashing and documents ---------------------------------------------------

// Deterministic hash of the subgraph under `node`. Ignores stored node.hash
// fields; recomputes bottom-up. Throws CycleDetectedError.
Hash dag_hash(const ConcreteSpec& spec, const Hash& node);
Hash dag_hash(const ConcreteSpec& spec);

// Rewrites every node's stored hash (and the edge sets and root) to the
// recomputed dag_hash values. Returns the mapping old hash -> new hash.
std::map<Hash, Hash> rehash(ConcreteSpec& spec);

// Full invariant check: DAG-ness, reachability, link-run name uniqueness,
// no build edges out of spliced nodes, no dangling edges, stored hashes match.
// Throws SpecValidationError / CycleDetectedError.
void validate(const ConcreteSpec& spec);

// Canonical whitespace-free JSON document (keys sorted). Byte-exact input
// contract documented in docs/spec-format.md.
std::string to_canonical_json(const ConcreteSpec& spec);
ConcreteSpec spec_from_json(const std::string& json_text);

}  // namespace splicekit

#endif
