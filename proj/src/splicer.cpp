#include "splicekit/splicer.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "splicekit/buildcache.hpp"
#include "splicekit/errors.hpp"

namespace splicekit {

SpecLookup lookup_in(const BuildCache& cache) {
  return [&cache](const Hash& h) -> std::optional<ConcreteSpec> {
    const CacheEntry* entry = cache.lookup(h);
    if (!entry) return std::nullopt;
    return entry->spec;
  };
}

SpecLookup overlay(const std::map<Hash, ConcreteSpec>& extras, SpecLookup fallback) {
  return [&extras, fallback](const Hash& h) -> std::optional<ConcreteSpec> {
    if (auto it = extras.find(h); it != extras.end()) return it->second;
    return fallback ? fallback(h) : std::nullopt;
  };
}

namespace {

// Provisional key for a rebuilt node until rehash() assigns the real one.
Hash provisional(const Hash& old) { return digest_bytes("rebuilt:" + old.digest); }

struct Rewriter {
  const ConcreteSpec& src;
  // Name substitutions that win over the source graph's own copies.
  const std::map<std::string, Hash>& captured_names;
  const Hash target;       // node being replaced (empty when rewriting the replacement side)
  const Hash target_subst; // what replaces it

  ConcreteSpec& out;
  std::map<Hash, Hash> rewritten;  // old hash -> provisional key (rebuilt nodes only)

  // Returns the out-graph key for the node formerly known as `h`.
  Hash rewrite(const Hash& h) {
    if (auto it = rewritten.find(h); it != rewritten.end()) return it->second;

    std::vector<Hash> new_children;
    bool changed = false;
    for (const auto& c : src.link_run_children(h)) {
      Hash resolved;
      if (!target.empty() && c == target) {
        resolved = target_subst;
      } else if (auto cap = captured_names.find(src.node(c).name);
                 cap != captured_names.end() && cap->second != c) {
        resolved = cap->second;
      } else {
        resolved = rewrite(c);
      }
      if (resolved != c) changed = true;
      new_children.push_back(resolved);
    }

    if (!changed) {
      rewritten.emplace(h, h);
      return h;
    }
    ConcreteNode rebuilt = src.node(h);
    rebuilt.build_spec_hash = h;  // pre-splice identity; build edges dropped below
    Hash key = provisional(h);
    rebuilt.hash = key;
    out.nodes.insert_or_assign(key, std::move(rebuilt));
    for (const auto& c : new_children) out.link_run_edges.emplace(key, c);
    rewritten.emplace(h, key);
    return key;
  }
};

void copy_graph(const ConcreteSpec& from, ConcreteSpec& into) {
  for (const auto& [h, n] : from.nodes) into.nodes.insert_or_assign(h, n);
  into.link_run_edges.insert(from.link_run_edges.begin(), from.link_run_edges.end());
  into.build_edges.insert(from.build_edges.begin(), from.build_edges.end());
}

// Drops edges whose parent was rebuilt (the rebuilt copy owns its own edges)
// and nodes that became unreachable.
void prune(ConcreteSpec& spec, const std::map<Hash, Hash>& rewritten) {
  auto rebuilt_parent = [&](const std::pair<Hash, Hash>& e) {
    auto it = rewritten.find(e.first);
    return it != rewritten.end() && it->second != e.first;
  };
  std::erase_if(spec.link_run_edges, rebuilt_parent);
  std::erase_if(spec.build_edges, rebuilt_parent);

  auto reachable = spec.full_closure(spec.root);
  std::erase_if(spec.nodes, [&](const auto& kv) { return !reachable.count(kv.first); });
  std::erase_if(spec.link_run_edges, [&](const std::pair<Hash, Hash>& e) {
    return !reachable.count(e.first) || !reachable.count(e.second);
  });
  std::erase_if(spec.build_edges, [&](const std::pair<Hash, Hash>& e) {
    return !reachable.count(e.first) || !reachable.count(e.second);
  });
}

}  // namespace

ConcreteSpec splice(const ConcreteSpec& root, const ConcreteSpec& replacement, bool transitive,
                    const std::optional<std::string>& target_name) {
  const std::string tname = target_name.value_or(replacement.root_node().name);

  std::vector<Hash> matches;
  for (const auto& h : root.link_run_closure(root.root)) {
    if (root.node(h).name == tname) matches.push_back(h);
  }
  if (matches.empty()) {
    throw NoTargetError("no link-run node named '" + tname + "' to splice against");
  }
  if (matches.size() > 1) {
    throw AmbiguousTargetError("multiple link-run nodes named '" + tname + "'");
  }
  const Hash target = matches.front();
  if (target == replacement.root) return root;  // no-op splice
  if (target == root.root) return replacement;  // degenerate: whole spec replaced

  ConcreteSpec out;
  copy_graph(root, out);
  copy_graph(replacement, out);

  std::map<std::string, Hash> no_capture;
  Hash final_rep_root = replacement.root;
  std::map<Hash, Hash> rep_rewritten;

  if (transitive) {
    // Replacement closure is imported verbatim; its copies win for shared names.
    std::map<std::string, Hash> rep_names;
    for (const auto& h : replacement.link_run_closure(replacement.root)) {
      rep_names.emplace(replacement.node(h).name, h);
    }
    rep_names.erase(root.node(target).name);

    Rewriter rw{root, rep_names, target, replacement.root, out, {}};
    out.root = rw.rewrite(root.root);
    prune(out, rw.rewritten);
  } else {
    // Root's copies win: re-point the replacement at them first.
    std::map<std::string, Hash> root_names;
    for (const auto& h : root.link_run_closure(root.root)) {
      if (h != target) root_names.emplace(root.node(h).name, h);
    }
    Rewriter rep_rw{replacement, root_names, Hash{}, Hash{}, out, {}};
    final_rep_root = rep_rw.rewrite(replacement.root);
    rep_rewritten = rep_rw.rewritten;

    Rewriter rw{root, no_capture, target, final_rep_root, out, {}};
    out.root = rw.rewrite(root.root);
    for (const auto& [old_h, new_h] : rep_rewritten) rw.rewritten.emplace(old_h, new_h);
    prune(out, rw.rewritten);
  }

  try {
    rehash(out);
  } catch (const CycleDetectedError& e) {
    throw WouldCycleError(std::string("splice would create a cycle: ") + e.what());
  }
  validate(out);
  return out;
}

namespace {

struct ChildRef {
  std::string name;
  Hash hash;
};

std::vector<ChildRef> link_run_child_refs(const ConcreteSpec& spec, const Hash& node) {
  std::vector<ChildRef> out;
  for (const auto& c : spec.link_run_children(node)) out.push_back({spec.node(c).name, c});
  return out;
}

// Pairs each child of the older spec with its successor among the newer
// children: same package name first, then the single leftover on each side.
std::map<Hash, ChildRef> child_map(const std::vector<ChildRef>& olds,
                                   const std::vector<ChildRef>& news) {
  std::map<Hash, ChildRef> out;
  std::vector<const ChildRef*> old_left, new_left;
  std::set<const ChildRef*> consumed;
  for (const auto& o : olds) {
    const ChildRef* match = nullptr;
    for (const auto& n : news) {
      if (n.name == o.name && !consumed.count(&n)) {
        match = &n;
        break;
      }
    }
    if (match) {
      consumed.insert(match);
      out.emplace(o.hash, *match);
    } else {
      old_left.push_back(&o);
    }
  }
  for (const auto& n : news) {
    if (!consumed.count(&n)) new_left.push_back(&n);
  }
  if (old_left.size() != new_left.size() || old_left.size() > 1) {
    throw Error("ambiguous rewiring: cannot pair replaced dependencies by name");
  }
  if (old_left.size() == 1) out.emplace(old_left.front()->hash, *new_left.front());
  return out;
}

}  // namespace

std::map<Hash, std::map<Hash, Hash>> rewiring_map(const ConcreteSpec& spliced,
                                                  const SpecLookup& store) {
  std::map<Hash, std::map<Hash, Hash>> maps;

  for (const auto& [h, n] : spliced.nodes) {
    if (!n.spliced()) continue;

    // Walk the provenance chain from this node back to the spec it was built as.
    std::vector<std::vector<ChildRef>> chain_children{link_run_child_refs(spliced, h)};
    std::set<Hash> seen{h};
    std::optional<Hash> back = n.build_spec_hash;
    while (back) {
      if (!seen.insert(*back).second) {
        throw MissingProvenanceError("provenance cycle at " + back->hash8());
      }
      auto spec = store(*back);
      if (!spec) {
        throw MissingProvenanceError("build spec " + back->hash8() + " of '" + n.name +
                                     "' is not resolvable");
      }
      chain_children.push_back(link_run_child_refs(*spec, spec->root));
      back = spec->root_node().build_spec_hash;
    }

    // Compose per-link child maps, terminal (as-built) spec first.
    std::map<Hash, Hash> total;
    const auto& terminal = chain_children.back();
    for (const auto& c : terminal) total.emplace(c.hash, c.hash);
    for (std::size_t i = chain_children.size() - 1; i > 0; --i) {
      auto link = child_map(chain_children[i], chain_children[i - 1]);
      for (auto& [origin, cur] : total) {
        if (auto it = link.find(cur); it != link.end()) cur = it->second.hash;
      }
    }
    std::erase_if(total, [](const auto& kv) { return kv.first == kv.second; });
    maps.emplace(h, std::move(total));
  }
  return maps;
}

}  // namespace splicekit
