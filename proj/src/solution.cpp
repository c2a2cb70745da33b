#include "splicekit/solution.hpp"

#include <algorithm>
#include <sstream>

#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"
#include "splicekit/splicer.hpp"

namespace splicekit {

namespace {

void apply_plan(const BuildCache& cache, const Hash& parent_entry, const SplicePlan& plan,
                int depth, ConcreteSpec& cur, Realization& out) {
  const CacheEntry* parent = cache.lookup(parent_entry);
  if (!parent) throw Error("reused entry " + parent_entry.hash8() + " is not in the cache");

  for (const auto& [dep_name, action] : plan) {
    if (!action.is_splice()) {
      // Kept dependency with choices of its own below it.
      Hash dep_entry;
      for (const auto& c : parent->spec.link_run_children(parent_entry)) {
        if (parent->spec.node(c).name == dep_name) dep_entry = c;
      }
      if (dep_entry.empty()) {
        throw Error("entry " + parent_entry.hash8() + " has no dependency '" + dep_name + "'");
      }
      apply_plan(cache, dep_entry, action.nested, depth + 1, cur, out);
      continue;
    }

    const CacheEntry* replacement = cache.lookup(action.replacement);
    if (!replacement) {
      throw Error("splice replacement " + action.replacement.hash8() + " is not in the cache");
    }
    // Identify the node being replaced, pre-splice.
    Hash replaced;
    for (const auto& h : cur.link_run_closure(cur.root)) {
      if (cur.node(h).name == dep_name) replaced = h;
    }
    bool transitive = depth == 0;
    ConcreteSpec next = splice(cur, replacement->spec, transitive, dep_name);
    if (next.root != cur.root) {
      out.decisions.push_back(
          {parent_entry, dep_name, replaced, action.replacement, transitive});
      // Record pre-splice subgraphs that new provenance links point at.
      for (const auto& [h, n] : next.nodes) {
        if (!n.build_spec_hash) continue;
        const Hash& back = *n.build_spec_hash;
        if (cur.nodes.count(back) && !out.intermediates.count(back) && !cache.lookup(back)) {
          out.intermediates.emplace(back, cur.subspec(back));
        }
      }
      cur = std::move(next);
    }
    apply_plan(cache, action.replacement, action.nested, depth + 1, cur, out);
  }
}

}  // namespace

Realization realize_reuse(const BuildCache& cache, const Hash& entry, const SplicePlan& plan) {
  const CacheEntry* e = cache.lookup(entry);
  if (!e) throw Error("reused entry " + entry.hash8() + " is not in the cache");
  Realization out;
  out.spec = e->spec;
  apply_plan(cache, entry, plan, 0, out.spec, out);
  return out;
}

SplicePlan plan_from_decisions(const std::vector<SpliceDecision>& decisions, const Hash& top_parent,
                               const BuildCache& cache) {
  SplicePlan top;
  // Owner lookup: a decision whose parent is `top_parent` goes into the top
  // plan; one whose parent is an earlier replacement goes into that action;
  // one whose parent sits deeper inside a kept dependency gets Keep actions
  // created along the path down to it.
  std::map<Hash, SplicePlan*> owners{{top_parent, &top}};

  std::function<SplicePlan*(const Hash&)> resolve_owner = [&](const Hash& parent) -> SplicePlan* {
    if (auto it = owners.find(parent); it != owners.end()) return it->second;
    // Search registered owners for one whose cached closure contains `parent`
    // below kept dependencies, then materialize the Keep chain.
    for (auto& [owner_hash, plan] : owners) {
      const CacheEntry* owner = cache.lookup(owner_hash);
      if (!owner || !owner->spec.nodes.count(parent)) continue;
      // Path of dependency names from the owner's root down to `parent`.
      std::vector<std::string> path;
      std::function<bool(const Hash&)> descend = [&](const Hash& at) {
        if (at == parent) return true;
        for (const auto& c : owner->spec.link_run_children(at)) {
          path.push_back(owner->spec.node(c).name);
          if (descend(c)) return true;
          path.pop_back();
        }
        return false;
      };
      if (!descend(owner_hash)) continue;
      SplicePlan* at = plan;
      Hash entry = owner_hash;
      for (const auto& name : path) {
        for (const auto& c : cache.lookup(entry)->spec.link_run_children(entry)) {
          if (cache.lookup(entry)->spec.node(c).name == name) entry = c;
        }
        auto [slot, inserted] = at->emplace(name, SpliceAction{Hash{}, {}});
        at = &slot->second.nested;
        owners.emplace(entry, at);
      }
      return at;
    }
    return nullptr;
  };

  for (const auto& d : decisions) {
    SplicePlan* owner = resolve_owner(d.parent_hash);
    if (!owner) continue;  // belongs to a different top-level parent
    auto [slot, inserted] = owner->emplace(d.replaced_name, SpliceAction{d.replacement_hash, {}});
    if (!inserted) throw Error("duplicate splice decision for dependency '" + d.replaced_name + "'");
    owners.emplace(d.replacement_hash, &slot->second.nested);
  }
  return top;
}

namespace {

void enumerate_plans_rec(const BuildCache& cache, const Repo& repo,
                         const std::vector<std::pair<std::string, Hash>>& deps, std::size_t index,
                         std::size_t max_candidates, const CandidateFilter& filter,
                         std::set<Hash>& on_path, SplicePlan& current,
                         const std::function<void(const SplicePlan&)>& emit) {
  if (index == deps.size()) {
    emit(current);
    return;
  }
  const auto& [dep_name, dep_hash] = deps[index];

  const CacheEntry* dep_entry = cache.lookup(dep_hash);
  if (!dep_entry) {
    enumerate_plans_rec(cache, repo, deps, index + 1, max_candidates, filter, on_path, current,
                        emit);
    return;
  }

  // Keep the cached dependency, with or without choices below it. The empty
  // nested plan comes out first and is left implicit in the map.
  {
    std::vector<std::pair<std::string, Hash>> kept_deps;
    for (const auto& c : dep_entry->spec.link_run_children(dep_hash)) {
      kept_deps.emplace_back(dep_entry->spec.node(c).name, c);
    }
    std::sort(kept_deps.begin(), kept_deps.end());
    SplicePlan kept_current;
    enumerate_plans_rec(cache, repo, kept_deps, 0, max_candidates, filter, on_path, kept_current,
                        [&](const SplicePlan& nested) {
                          if (nested.empty()) {
                            enumerate_plans_rec(cache, repo, deps, index + 1, max_candidates,
                                                filter, on_path, current, emit);
                          } else {
                            current[dep_name] = SpliceAction{Hash{}, nested};
                            enumerate_plans_rec(cache, repo, deps, index + 1, max_candidates,
                                                filter, on_path, current, emit);
                            current.erase(dep_name);
                          }
                        });
  }

  auto candidates = splice_candidates(dep_entry->spec.root_node(), repo, cache);
  if (filter) candidates = filter(std::move(candidates));
  if (max_candidates && candidates.size() > max_candidates) candidates.resize(max_candidates);

  for (const auto& cand : candidates) {
    if (on_path.count(cand.replacement)) continue;  // no self-recursive plans
    on_path.insert(cand.replacement);

    const CacheEntry* replacement = cache.lookup(cand.replacement);
    std::vector<std::pair<std::string, Hash>> nested_deps;
    for (const auto& c : replacement->spec.link_run_children(replacement->root_hash)) {
      nested_deps.emplace_back(replacement->spec.node(c).name, c);
    }
    std::sort(nested_deps.begin(), nested_deps.end());

    SplicePlan nested_current;
    enumerate_plans_rec(cache, repo, nested_deps, 0, max_candidates, filter, on_path,
                        nested_current, [&](const SplicePlan& nested) {
                          current[dep_name] = SpliceAction{cand.replacement, nested};
                          enumerate_plans_rec(cache, repo, deps, index + 1, max_candidates, filter,
                                              on_path, current, emit);
                          current.erase(dep_name);
                        });
    on_path.erase(cand.replacement);
  }
}

}  // namespace

void enumerate_splice_plans(const BuildCache& cache, const Repo& repo, const Hash& entry,
                            std::size_t max_candidates,
                            const std::function<void(const SplicePlan&)>& emit,
                            const CandidateFilter& filter) {
  const CacheEntry* e = cache.lookup(entry);
  if (!e) return;
  std::vector<std::pair<std::string, Hash>> deps;
  for (const auto& c : e->spec.link_run_children(e->root_hash)) {
    deps.emplace_back(e->spec.node(c).name, c);
  }
  std::sort(deps.begin(), deps.end());
  std::set<Hash> on_path{entry};
  SplicePlan current;
  enumerate_plans_rec(cache, repo, deps, 0, max_candidates, filter, on_path, current, emit);
}

std::set<std::string> addressable_names(const Repo& repo, const AbstractSpec& request) {
  std::set<std::string> names;
  names.insert(request.root.name);
  for (const auto& [dep, kind] : request.dependencies) names.insert(dep.name);
  for (const auto& [pkg_name, def] : repo.packages) {
    for (const auto& d : def.depends_on) names.insert(d.target.name);
    for (const auto& c : def.can_splice) names.insert(c.target.name);
  }
  return names;
}

std::vector<SpliceCandidate> collapse_candidates(std::vector<SpliceCandidate> candidates,
                                                 const BuildCache& cache, const Repo& repo,
                                                 const std::set<std::string>& pinned_names,
                                                 const std::set<std::string>& forbidden) {
  std::vector<SpliceCandidate> out;
  std::set<std::string> seen_classes;
  for (auto& cand : candidates) {  // already hash-ascending
    const CacheEntry* entry = cache.lookup(cand.replacement);
    const ConcreteNode& root = entry->spec.root_node();
    if (forbidden.count(root.name)) continue;
    if (pinned_names.count(root.name)) {
      out.push_back(std::move(cand));
      continue;
    }
    std::ostringstream cls;
    const PackageDef* def = repo.find(root.name);
    auto idx = def ? def->version_index(root.version) : std::nullopt;
    cls << (idx ? std::to_string(*idx) : "?") << '|';
    std::size_t deviations = 0;
    if (def) {
      for (const auto& v : def->variants) {
        auto it = root.variants.find(v.name);
        if (it != root.variants.end() && !(it->second == v.default_value)) deviations += 1;
      }
    }
    cls << deviations << '|' << root.os << '|' << root.target << '|';
    for (const auto& pv : provided_virtuals(repo, root)) cls << pv << ',';
    cls << '|';
    for (const auto& [h, n] : entry->spec.nodes) {
      if (h != entry->root_hash) cls << h.digest << ',';
    }
    if (seen_classes.insert(cls.str()).second) out.push_back(std::move(cand));
  }
  return out;
}

std::vector<std::string> provided_virtuals(const Repo& repo, const ConcreteNode& node) {
  std::vector<std::string> out;
  const PackageDef* def = repo.find(node.name);
  if (!def) return out;
  for (const auto& p : def->provides) {
    if (when_status(p.when, PartialNode::of(node)) == DirectiveStatus::active) {
      out.push_back(p.virtual_name);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

VariantDomains variant_domains(const Repo& repo, const AbstractSpec& request) {
  VariantDomains domains;
  for (const auto& [pkg_name, def] : repo.packages) {
    for (const auto& v : def.variants) {
      domains[{pkg_name, v.name}].push_back(v.default_value);
    }
  }
  auto mention = [&](const std::string& pkg_name, const std::map<std::string, VariantValue>& vars) {
    for (const auto& [vn, value] : vars) {
      auto it = domains.find({pkg_name, vn});
      if (it == domains.end()) continue;
      if (std::find(it->second.begin(), it->second.end(), value) == it->second.end()) {
        it->second.push_back(value);
      }
    }
  };
  auto mention_constraints = [&](const NodeConstraints& c) {
    if (c.name.empty()) return;
    if (repo.is_virtual(c.name) && !repo.find(c.name)) {
      for (const auto& provider : repo.providers.at(c.name)) mention(provider, c.variants);
    } else {
      mention(c.name, c.variants);
    }
  };

  mention_constraints(request.root);
  for (const auto& [dep, kind] : request.dependencies) mention_constraints(dep);
  for (const auto& [pkg_name, def] : repo.packages) {
    for (const auto& d : def.depends_on) {
      mention_constraints(d.target);
      if (d.when) mention(pkg_name, d.when->variants);
    }
    for (const auto& p : def.provides) {
      if (p.when) mention(pkg_name, p.when->variants);
    }
    for (const auto& c : def.can_splice) {
      mention_constraints(c.target);
      if (c.when) mention(pkg_name, c.when->variants);
    }
  }
  return domains;
}

Objective objective_of(const ConcreteSpec& spec, const Repo& repo,
                       const std::set<std::string>& to_build,
                       const std::vector<SpliceDecision>& splices) {
  Objective obj;
  obj.builds = to_build.size();
  obj.splice_count = splices.size();
  for (const auto& [h, n] : spec.nodes) {
    if (const PackageDef* def = repo.find(n.name)) {
      if (auto idx = def->version_index(n.version)) obj.version_penalty += *idx;
      for (const auto& v : def->variants) {
        auto it = n.variants.find(v.name);
        if (it != n.variants.end() && !(it->second == v.default_value)) obj.default_deviation += 1;
      }
    }
  }
  return obj;
}

std::map<std::string, std::string> derive_providers(const ConcreteSpec& spec, const Repo& repo) {
  std::map<std::string, std::string> out;
  for (const auto& h : spec.link_run_closure(spec.root)) {
    const ConcreteNode& n = spec.node(h);
    for (const auto& v : provided_virtuals(repo, n)) out.emplace(v, n.name);
  }
  return out;
}

std::string solution_sort_key(const SolveResult& result, const Repo& repo,
                              const SolveOptions& opts) {
  std::ostringstream key;
  auto field = [&](std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%020llu", static_cast<unsigned long long>(v));
    key << buf << '|';
  };
  field(result.objective.builds);
  field(result.objective.version_penalty);
  field(result.objective.default_deviation);
  field(result.objective.splice_count);

  // Competing splice candidates tie-break by lowest replacement hash; equal
  // objectives imply equal decision counts, so the lists are comparable.
  std::vector<std::tuple<std::string, std::string, std::string>> splice_order;
  for (const auto& d : result.splices) {
    splice_order.emplace_back(d.parent_hash.digest, d.replaced_name, d.replacement_hash.digest);
  }
  std::sort(splice_order.begin(), splice_order.end());
  for (const auto& [parent, name, replacement] : splice_order) {
    key << parent << ':' << name << ':' << replacement << '|';
  }

  // Provider choices (preference rank, then name) outrank the per-node
  // version refinement: aggregate version recency already decided at
  // objective tier 2.
  for (const auto& [vname, pname] : derive_providers(result.spec, repo)) {
    std::uint64_t rank = 9999;
    if (auto pref = opts.provider_preference.find(vname); pref != opts.provider_preference.end()) {
      auto at = std::find(pref->second.begin(), pref->second.end(), pname);
      if (at != pref->second.end()) rank = static_cast<std::uint64_t>(at - pref->second.begin());
    }
    key << vname << "=";
    field(rank);
    key << pname << '|';
  }

  std::vector<std::pair<std::string, Hash>> order;
  for (const auto& [h, n] : result.spec.nodes) order.emplace_back(n.name, h);
  std::sort(order.begin(), order.end());

  for (const auto& [name, h] : order) {
    const ConcreteNode& n = result.spec.node(h);
    std::uint64_t idx = 999;
    if (const PackageDef* def = repo.find(name)) {
      if (auto vi = def->version_index(n.version)) idx = *vi;
    }
    field(idx);
  }
  for (const auto& [name, h] : order) key << h.digest << '|';
  return key.str();
}

std::vector<RequestCheckFailure> check_solution(const ConcreteSpec& spec,
                                                const AbstractSpec& request, const Repo& repo,
                                                const SolveOptions& opts,
                                                const std::set<std::string>& to_build,
                                                const VariantDomains* domains) {
  std::vector<RequestCheckFailure> failures;
  auto fail = [&](const std::string& msg) { failures.push_back({msg}); };

  auto link_run = spec.link_run_closure(spec.root);
  std::map<std::string, Hash> link_run_names;
  for (const auto& h : link_run) link_run_names.emplace(spec.node(h).name, h);
  auto providers = derive_providers(spec, repo);

  // Root identity.
  const ConcreteNode& root = spec.root_node();
  if (!request.root.name.empty() && root.name != request.root.name) {
    auto it = providers.find(request.root.name);
    if (it == providers.end() || it->second != root.name) {
      fail("root is '" + root.name + "', request asked for '" + request.root.name + "'");
    }
  }
  NodeConstraints root_c = request.root;
  root_c.name.clear();
  if (!satisfies(root, root_c)) {
    fail("root does not satisfy request constraints '" + format_constraints(request.root) + "'");
  }

  // Request dependency constraints are presence constraints over the closure.
  for (const auto& [dep, kind] : request.dependencies) {
    std::string name = dep.name;
    if (repo.is_virtual(name) && !repo.find(name)) {
      auto it = providers.find(name);
      if (it == providers.end()) {
        fail("virtual '" + name + "' from the request is not provided in the solution");
        continue;
      }
      name = it->second;
    }
    const Hash* found = nullptr;
    if (kind == EdgeKind::build) {
      for (const auto& [h, n] : spec.nodes) {
        if (n.name == name) found = &h;
      }
    } else if (auto it = link_run_names.find(name); it != link_run_names.end()) {
      found = &it->second;
    }
    if (!found) {
      fail("requested dependency '" + dep.name + "' is absent from the solution");
      continue;
    }
    NodeConstraints c = dep;
    c.name.clear();
    if (!satisfies(spec.node(*found), c)) {
      fail("node '" + name + "' does not satisfy requested '" + format_constraints(dep) + "'");
    }
  }

  // Forbidden packages never appear in the link-run closure.
  for (const auto& fname : opts.forbidden_packages) {
    if (link_run_names.count(fname)) {
      fail("forbidden package '" + fname + "' appears in the link-run graph");
    }
  }

  // Homogeneous os/target across the link-run closure.
  for (const auto& h : link_run) {
    const ConcreteNode& n = spec.node(h);
    if (n.os != root.os || n.target != root.target) {
      fail("node '" + n.name + "' has os/target " + n.os + "/" + n.target + ", root has " +
           root.os + "/" + root.target);
    }
  }

  // Every node must be expressible against the repo: known package, declared
  // version, exactly the declared variants. Keeps the objective well-defined
  // and reuse candidates comparable.
  for (const auto& [h, n] : spec.nodes) {
    const PackageDef* def = repo.find(n.name);
    if (!def) {
      fail("node '" + n.name + "' has no package definition");
      continue;
    }
    if (!def->version_index(n.version)) {
      fail("node '" + n.name + "' uses undeclared version " + n.version.str());
    }
    if (n.variants.size() != def->variants.size()) {
      fail("node '" + n.name + "' variant set differs from the declared variants");
    } else {
      for (const auto& v : def->variants) {
        if (!n.variants.count(v.name)) {
          fail("node '" + n.name + "' misses declared variant '" + v.name + "'");
        }
      }
    }
  }

  // At most one active provider per virtual in the link-run graph.
  std::map<std::string, std::vector<std::string>> active_providers;
  for (const auto& h : link_run) {
    for (const auto& v : provided_virtuals(repo, spec.node(h))) {
      active_providers[v].push_back(spec.node(h).name);
    }
  }
  for (const auto& [v, names] : active_providers) {
    if (names.size() > 1) {
      std::string joined;
      for (const auto& n : names) joined += (joined.empty() ? "" : ", ") + n;
      fail("virtual '" + v + "' has multiple providers in the link-run graph: " + joined);
    }
  }

  // Fresh nodes must satisfy their package's active directives.
  VariantDomains local_domains;
  if (!domains) {
    local_domains = variant_domains(repo, request);
    domains = &local_domains;
  }
  for (const auto& [h, n] : spec.nodes) {
    if (!to_build.count(n.name) || n.spliced()) continue;
    const PackageDef* def = repo.find(n.name);
    if (!def) {
      fail("built node '" + n.name + "' has no package definition");
      continue;
    }
    if (!def->version_index(n.version)) {
      fail("built node '" + n.name + "' uses undeclared version " + n.version.str());
    }
    for (const auto& v : def->variants) {
      auto it = n.variants.find(v.name);
      if (it == n.variants.end()) {
        fail("built node '" + n.name + "' misses variant '" + v.name + "'");
        continue;
      }
      if (!v.allowed.empty() && !it->second.is_bool() &&
          std::find(v.allowed.begin(), v.allowed.end(), it->second.as_string()) ==
              v.allowed.end()) {
        fail("built node '" + n.name + "' variant " + v.name + "=" + it->second.str() +
             " not among allowed values");
      }
      const auto& domain = domains->at({n.name, v.name});
      if (std::find(domain.begin(), domain.end(), it->second) == domain.end()) {
        fail("built node '" + n.name + "' deviates on variant '" + v.name +
             "' without any constraint mentioning that value");
      }
    }
    auto active = active_directives(*def, PartialNode::of(n));
    for (const auto* d : active.depends_on) {
      std::string dep_name = d->target.name;
      bool virt = repo.is_virtual(dep_name) && !repo.find(dep_name);
      if (virt) {
        auto it = providers.find(dep_name);
        if (it == providers.end()) {
          fail("node '" + n.name + "' needs virtual '" + dep_name + "' but no provider is active");
          continue;
        }
        dep_name = it->second;
      }
      const auto& children =
          d->kind == EdgeKind::build ? spec.build_children(h) : spec.link_run_children(h);
      const ConcreteNode* child = nullptr;
      for (const auto& c : children) {
        if (spec.node(c).name == dep_name) child = &spec.node(c);
      }
      if (!child) {
        fail("node '" + n.name + "' misses active dependency '" + d->target.name + "'");
        continue;
      }
      if (virt) {
        auto pv = provided_virtuals(repo, *child);
        if (std::find(pv.begin(), pv.end(), d->target.name) == pv.end()) {
          fail("node '" + child->name + "' does not actively provide '" + d->target.name + "'");
        }
      }
      NodeConstraints c = d->target;
      c.name.clear();
      if (!satisfies(*child, c)) {
        fail("dependency '" + dep_name + "' of '" + n.name + "' does not satisfy '" +
             format_constraints(d->target) + "'");
      }
    }
  }

  return failures;
}

}  // namespace splicekit
