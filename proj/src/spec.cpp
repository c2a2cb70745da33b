#include "splicekit/spec.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "splicekit/errors.hpp"

namespace splicekit {

using nlohmann::json;

std::string VariantValue::str() const {
  if (is_bool()) return as_bool() ? "true" : "false";
  return as_string();
}

std::string edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::link_run:
      return "link-run";
    case EdgeKind::build:
      return "build";
    case EdgeKind::any:
      return "any";
  }
  return "any";
}

EdgeKind edge_kind_from_name(const std::string& name) {
  if (name == "link-run") return EdgeKind::link_run;
  if (name == "build") return EdgeKind::build;
  if (name == "any") return EdgeKind::any;
  throw Error("unknown edge kind: '" + name + "'");
}

const ConcreteNode& ConcreteSpec::node(const Hash& h) const {
  auto it = nodes.find(h);
  if (it == nodes.end()) throw Error("no node with hash " + h.digest);
  return it->second;
}

namespace {

std::vector<Hash> sorted_children(const ConcreteSpec& spec,
                                  const std::set<std::pair<Hash, Hash>>& edges, const Hash& parent) {
  std::vector<Hash> out;
  for (auto it = edges.lower_bound({parent, Hash{}}); it != edges.end() && it->first == parent; ++it) {
    out.push_back(it->second);
  }
  std::sort(out.begin(), out.end(), [&](const Hash& a, const Hash& b) {
    const auto& na = spec.node(a).name;
    const auto& nb = spec.node(b).name;
    return std::tie(na, a) < std::tie(nb, b);
  });
  return out;
}

}  // namespace

std::vector<Hash> ConcreteSpec::link_run_children(const Hash& parent) const {
  return sorted_children(*this, link_run_edges, parent);
}

std::vector<Hash> ConcreteSpec::build_children(const Hash& parent) const {
  return sorted_children(*this, build_edges, parent);
}

std::set<Hash> ConcreteSpec::link_run_closure(const Hash& from) const {
  std::set<Hash> seen;
  std::vector<Hash> work{from};
  while (!work.empty()) {
    Hash h = work.back();
    work.pop_back();
    if (!seen.insert(h).second) continue;
    for (const auto& c : link_run_children(h)) work.push_back(c);
  }
  return seen;
}

std::set<Hash> ConcreteSpec::full_closure(const Hash& from) const {
  std::set<Hash> seen;
  std::vector<Hash> work{from};
  while (!work.empty()) {
    Hash h = work.back();
    work.pop_back();
    if (!seen.insert(h).second) continue;
    for (const auto& c : link_run_children(h)) work.push_back(c);
    for (const auto& c : build_children(h)) work.push_back(c);
  }
  return seen;
}

ConcreteSpec ConcreteSpec::subspec(const Hash& from) const {
  ConcreteSpec out;
  out.root = from;
  for (const auto& h : full_closure(from)) out.nodes.emplace(h, node(h));
  for (const auto& e : link_run_edges) {
    if (out.nodes.count(e.first) && out.nodes.count(e.second)) out.link_run_edges.insert(e);
  }
  for (const auto& e : build_edges) {
    if (out.nodes.count(e.first) && out.nodes.count(e.second)) out.build_edges.insert(e);
  }
  return out;
}

bool satisfies(const ConcreteNode& candidate, const NodeConstraints& constraint) {
  if (!constraint.name.empty() && candidate.name != constraint.name) return false;
  if (constraint.version && !constraint.version->accepts(candidate.version)) return false;
  for (const auto& [vname, want] : constraint.variants) {
    auto it = candidate.variants.find(vname);
    if (it == candidate.variants.end() || !(it->second == want)) return false;
  }
  if (constraint.os && candidate.os != *constraint.os) return false;
  if (constraint.target && candidate.target != *constraint.target) return false;
  return true;
}

bool satisfies(const NodeConstraints& candidate, const NodeConstraints& constraint) {
  if (!constraint.name.empty() && candidate.name != constraint.name) return false;
  if (constraint.version) {
    if (!candidate.version || !candidate.version->subset_of(*constraint.version)) return false;
  }
  for (const auto& [vname, want] : constraint.variants) {
    auto it = candidate.variants.find(vname);
    if (it == candidate.variants.end() || !(it->second == want)) return false;
  }
  if (constraint.os && candidate.os != constraint.os) return false;
  if (constraint.target && candidate.target != constraint.target) return false;
  return true;
}

NodeConstraints merge_constraints(const NodeConstraints& a, const NodeConstraints& b) {
  if (!a.name.empty() && !b.name.empty() && a.name != b.name) {
    throw ConflictError("cannot merge constraints for '" + a.name + "' and '" + b.name + "'");
  }
  NodeConstraints out = a;
  if (out.name.empty()) out.name = b.name;
  if (b.version) {
    out.version = out.version ? out.version->intersect(*b.version) : *b.version;
  }
  for (const auto& [vname, value] : b.variants) {
    auto [it, inserted] = out.variants.emplace(vname, value);
    if (!inserted && !(it->second == value)) {
      throw ConflictError("conflicting values for variant '" + vname + "' on '" + out.name + "': " +
                          it->second.str() + " vs " + value.str());
    }
  }
  if (b.os) {
    if (out.os && *out.os != *b.os) {
      throw ConflictError("conflicting os on '" + out.name + "': " + *out.os + " vs " + *b.os);
    }
    out.os = b.os;
  }
  if (b.target) {
    if (out.target && *out.target != *b.target) {
      throw ConflictError("conflicting target on '" + out.name + "': " + *out.target + " vs " + *b.target);
    }
    out.target = b.target;
  }
  return out;
}

namespace {

json variants_doc(const std::map<std::string, VariantValue>& variants) {
  json doc = json::object();
  for (const auto& [name, value] : variants) {
    if (value.is_bool()) {
      doc[name] = value.as_bool();
    } else {
      doc[name] = value.as_string();
    }
  }
  return doc;
}

std::map<std::string, VariantValue> variants_from_doc(const json& doc) {
  std::map<std::string, VariantValue> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it->is_boolean()) {
      out.emplace(it.key(), VariantValue(it->get<bool>()));
    } else if (it->is_string()) {
      out.emplace(it.key(), VariantValue(it->get<std::string>()));
    } else {
      throw Error("variant value for '" + it.key() + "' must be boolean or string");
    }
  }
  return out;
}

enum class VisitState { open, done };

Hash hash_subgraph(const ConcreteSpec& spec, const Hash& at, std::map<Hash, Hash>& memo,
                   std::map<Hash, VisitState>& visiting) {
  if (auto it = memo.find(at); it != memo.end()) return it->second;
  if (auto it = visiting.find(at); it != visiting.end() && it->second == VisitState::open) {
    throw CycleDetectedError("cycle through node " + at.digest.substr(0, 8));
  }
  visiting[at] = VisitState::open;

  const ConcreteNode& n = spec.node(at);
  // Hash preimage: canonical per-node document over recursively hashed children.
  json doc;
  doc["name"] = n.name;
  doc["version"] = n.version.str();
  doc["variants"] = variants_doc(n.variants);
  doc["os"] = n.os;
  doc["target"] = n.target;
  json deps = json::array();
  std::vector<std::pair<std::string, Hash>> edges;
  for (const auto& c : spec.link_run_children(at)) {
    edges.emplace_back("link-run", hash_subgraph(spec, c, memo, visiting));
  }
  for (const auto& c : spec.build_children(at)) {
    edges.emplace_back("build", hash_subgraph(spec, c, memo, visiting));
  }
  std::sort(edges.begin(), edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.first, a.second) < std::tie(b.first, b.second); });
  for (const auto& [kind, child] : edges) deps.push_back(json::array({kind, child.digest}));
  doc["deps"] = deps;
  if (n.build_spec_hash) doc["build_spec"] = n.build_spec_hash->digest;

  Hash h = digest_bytes(doc.dump());
  visiting[at] = VisitState::done;
  memo.emplace(at, h);
  return h;
}

}  // namespace

Hash dag_hash(const ConcreteSpec& spec, const Hash& node) {
  std::map<Hash, Hash> memo;
  std::map<Hash, VisitState> visiting;
  return hash_subgraph(spec, node, memo, visiting);
}

Hash dag_hash(const ConcreteSpec& spec) { return dag_hash(spec, spec.root); }

std::map<Hash, Hash> rehash(ConcreteSpec& spec) {
  std::map<Hash, Hash> memo;
  std::map<Hash, VisitState> visiting;
  for (const auto& [h, n] : spec.nodes) hash_subgraph(spec, h, memo, visiting);

  ConcreteSpec out;
  out.root = memo.at(spec.root);
  for (const auto& [old_hash, n] : spec.nodes) {
    ConcreteNode copy = n;
    copy.hash = memo.at(old_hash);
    // Two distinct keys may collapse to one node if their subgraphs agree.
    out.nodes.insert_or_assign(copy.hash, std::move(copy));
  }
  for (const auto& [p, c] : spec.link_run_edges) out.link_run_edges.emplace(memo.at(p), memo.at(c));
  for (const auto& [p, c] : spec.build_edges) out.build_edges.emplace(memo.at(p), memo.at(c));
  spec = std::move(out);
  return memo;
}

void validate(const ConcreteSpec& spec) {
  if (spec.nodes.empty()) throw SpecValidationError("spec has no nodes");
  if (!spec.nodes.count(spec.root)) throw SpecValidationError("root hash not among nodes");
  for (const auto& edges : {spec.link_run_edges, spec.build_edges}) {
    for (const auto& [p, c] : edges) {
      if (!spec.nodes.count(p) || !spec.nodes.count(c)) {
        throw SpecValidationError("dangling edge " + p.hash8() + " -> " + c.hash8());
      }
    }
  }
  // Hash integrity also proves acyclicity (hash_subgraph throws on cycles).
  std::map<Hash, Hash> memo;
  std::map<Hash, VisitState> visiting;
  for (const auto& [h, n] : spec.nodes) {
    Hash recomputed = hash_subgraph(spec, h, memo, visiting);
    if (recomputed != h) {
      throw SpecValidationError("stored hash " + h.hash8() + " of node '" + n.name +
                                "' does not match recomputed " + recomputed.hash8());
    }
    if (n.hash != h) {
      throw SpecValidationError("node '" + n.name + "' stored under key " + h.hash8() +
                                " carries hash field " + n.hash.hash8());
    }
  }
  // Reachability from root over both edge sets.
  auto reachable = spec.full_closure(spec.root);
  if (reachable.size() != spec.nodes.size()) {
    throw SpecValidationError("spec contains nodes unreachable from root");
  }
  // One node per package name in the link-run-reachable subgraph.
  std::map<std::string, Hash> seen_names;
  for (const auto& h : spec.link_run_closure(spec.root)) {
    const auto& n = spec.node(h);
    auto [it, inserted] = seen_names.emplace(n.name, h);
    if (!inserted) {
      throw SpecValidationError("package '" + n.name + "' appears twice in the link-run graph (" +
                                it->second.hash8() + ", " + h.hash8() + ")");
    }
  }
  // Spliced nodes carry no build edges.
  for (const auto& [h, n] : spec.nodes) {
    if (n.spliced() && !spec.build_children(h).empty()) {
      throw SpecValidationError("spliced node '" + n.name + "' (" + h.hash8() + ") has build edges");
    }
  }
}

std::string to_canonical_json(const ConcreteSpec& spec) {
  json doc;
  doc["root"] = spec.root.digest;
  json nodes = json::array();
  for (const auto& [h, n] : spec.nodes) {
    json nd;
    nd["name"] = n.name;
    nd["version"] = n.version.str();
    nd["variants"] = variants_doc(n.variants);
    nd["os"] = n.os;
    nd["target"] = n.target;
    nd["hash"] = n.hash.digest;
    if (n.build_spec_hash) nd["build_spec"] = n.build_spec_hash->digest;
    nodes.push_back(std::move(nd));
  }
  doc["nodes"] = std::move(nodes);
  auto edges_doc = [](const std::set<std::pair<Hash, Hash>>& edges) {
    json arr = json::array();
    for (const auto& [p, c] : edges) arr.push_back(json::array({p.digest, c.digest}));
    return arr;
  };
  doc["link_run_edges"] = edges_doc(spec.link_run_edges);
  doc["build_edges"] = edges_doc(spec.build_edges);
  return doc.dump();
}

ConcreteSpec spec_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed spec document: ") + e.what());
  }
  ConcreteSpec spec;
  try {
    spec.root = Hash(doc.at("root").get<std::string>());
    for (const auto& nd : doc.at("nodes")) {
      ConcreteNode n;
      n.name = nd.at("name").get<std::string>();
      n.version = Version::parse(nd.at("version").get<std::string>());
      n.variants = variants_from_doc(nd.at("variants"));
      n.os = nd.at("os").get<std::string>();
      n.target = nd.at("target").get<std::string>();
      n.hash = Hash(nd.at("hash").get<std::string>());
      if (nd.contains("build_spec")) n.build_spec_hash = Hash(nd.at("build_spec").get<std::string>());
      Hash key = n.hash;
      spec.nodes.emplace(std::move(key), std::move(n));
    }
    for (const auto& e : doc.at("link_run_edges")) {
      spec.link_run_edges.emplace(Hash(e.at(0).get<std::string>()), Hash(e.at(1).get<std::string>()));
    }
    for (const auto& e : doc.at("build_edges")) {
      spec.build_edges.emplace(Hash(e.at(0).get<std::string>()), Hash(e.at(1).get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed spec document: ") + e.what());
  }
  return spec;
}

}  // namespace splicekit
