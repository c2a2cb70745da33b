#include "splicekit/concretizer.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <json.hpp>

#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"
#include "splicekit/solution.hpp"
#include "splicekit/splicer.hpp"

namespace splicekit {

using nlohmann::json;

std::string Objective::str() const {
  std::ostringstream out;
  out << "builds=" << builds << " version_penalty=" << version_penalty
      << " default_deviation=" << default_deviation << " splices=" << splice_count;
  return out.str();
}

std::vector<SpliceCandidate> splice_candidates(const ConcreteNode& node, const Repo& repo,
                                               const BuildCache& cache) {
  std::vector<SpliceCandidate> out;
  for (const auto& [h, entry] : cache.entries()) {
    if (h == node.hash) continue;
    const ConcreteNode& candidate_root = entry.spec.root_node();
    const PackageDef* def = repo.find(candidate_root.name);
    if (!def) continue;
    for (const auto& d : def->can_splice) {
      if (d.target.name != node.name) continue;
      NodeConstraints target = d.target;
      target.name.clear();
      if (!satisfies(node, target)) continue;
      if (when_status(d.when, PartialNode::of(candidate_root)) != DirectiveStatus::active) continue;
      out.push_back({h, &d});
      break;  // one directive per candidate spec is enough
    }
  }
  return out;  // map iteration is already hash-ascending
}

namespace {

struct Constraint {
  NodeConstraints merged;
  std::vector<std::string> sources;
};

struct FreshChoice {
  ConcreteNode attrs;  // provisional hash
  std::vector<std::pair<std::string, EdgeKind>> deps;  // dep slot names (virtuals unresolved)
};

struct SearchState {
  std::map<std::string, Constraint> store;
  std::map<std::string, int> scheduled;                // slot name -> depth
  std::map<std::string, bool> slot_scope;              // name -> link-run reachable from root
  std::set<std::pair<int, std::string>> agenda;
  std::map<std::string, Hash> occupancy;               // package name -> node hash
  std::map<Hash, ConcreteNode> occupants;              // attrs of occupied nodes
  std::set<std::string> deferred;
  std::map<std::string, std::string> binding;          // virtual -> provider package
  std::map<std::string, std::set<std::string>> required_provides;

  std::map<std::string, FreshChoice> fresh;
  std::vector<ConcreteSpec> fragments;                 // realized reuse closures
  std::vector<SpliceDecision> decisions;
  std::map<Hash, ConcreteSpec> intermediates;
  std::set<Hash> reused;
  std::set<std::string> to_build;
  std::set<Hash> counted;                              // objective accounting
  Objective partial;
  int resolved = 0;
};

Hash fresh_key(const std::string& name) { return digest_bytes("fresh:" + name); }

struct Solver {
  const AbstractSpec& request;
  const Repo& repo;
  const BuildCache& cache;
  const SolveOptions& opts;

  std::string solve_os;
  std::string solve_target;
  VariantDomains domains;
  std::set<std::string> pinned_names;
  CandidateFilter candidate_filter;
  CandidateFilter candidate_filter_build_scope;  // forbidden applies to link-run only

  std::optional<SolveResult> best;
  std::string best_key;
  SolveStats stats;

  int deepest_fail = -1;
  std::vector<std::string> deepest_core;

  bool is_virtual_name(const std::string& name) const {
    return repo.is_virtual(name) && !repo.find(name);
  }

  void fail_branch(const SearchState& state, const std::string& slot, const std::string& reason) {
    stats.backtracks += 1;
    if (state.resolved <= deepest_fail) return;
    deepest_fail = state.resolved;
    deepest_core.clear();
    if (auto it = state.store.find(slot); it != state.store.end()) {
      deepest_core = it->second.sources;
    }
    deepest_core.push_back(reason);
  }

  // --- constraint store ------------------------------------------------------

  bool impose(SearchState& state, const std::string& name, const NodeConstraints& constraints,
              const std::string& source, int depth, bool link_run_scope, std::string& why) {
    auto& scope = state.slot_scope[name];
    scope = scope || link_run_scope;
    auto& slot = state.store[name];
    NodeConstraints named = constraints;
    named.name = name;
    try {
      slot.merged = slot.merged.name.empty() ? named : merge_constraints(slot.merged, named);
    } catch (const ConflictError& e) {
      slot.sources.push_back(source);
      why = e.what();
      return false;
    }
    slot.sources.push_back(source);

    if (auto occ = state.occupancy.find(name); occ != state.occupancy.end()) {
      NodeConstraints check = slot.merged;
      check.name.clear();
      if (!satisfies(state.occupants.at(occ->second), check)) {
        why = "existing node '" + name + "' violates " + source;
        return false;
      }
      return true;
    }
    if (!state.scheduled.count(name)) {
      state.scheduled.emplace(name, depth);
      state.agenda.emplace(depth, name);
    }
    return true;
  }

  bool occupy(SearchState& state, const ConcreteNode& node, bool link_run_scope, std::string& why) {
    auto it = state.occupancy.find(node.name);
    if (it != state.occupancy.end()) {
      if (it->second != node.hash) {
        why = "two different nodes for package '" + node.name + "'";
        return false;
      }
      return true;
    }
    if (link_run_scope && opts.forbidden_packages.count(node.name)) {
      why = "package '" + node.name + "' is forbidden";
      return false;
    }
    if (auto slot = state.store.find(node.name); slot != state.store.end()) {
      NodeConstraints check = slot->second.merged;
      check.name.clear();
      if (!satisfies(node, check)) {
        why = "node '" + node.name + "@" + node.version.str() + "' violates accumulated constraints";
        return false;
      }
    }
    state.occupancy.emplace(node.name, node.hash);
    state.occupants.emplace(node.hash, node);
    count_node(state, node);
    return true;
  }

  void count_node(SearchState& state, const ConcreteNode& node) {
    if (!state.counted.insert(node.hash).second) return;
    if (const PackageDef* def = repo.find(node.name)) {
      if (auto idx = def->version_index(node.version)) state.partial.version_penalty += *idx;
      for (const auto& v : def->variants) {
        auto it = node.variants.find(v.name);
        if (it != node.variants.end() && !(it->second == v.default_value)) {
          state.partial.default_deviation += 1;
        }
      }
    }
  }

  // Merges a realized reuse closure: link-run members occupy their names,
  // build-subgraph members only count toward the objective. `link_run_scope`
  // says whether the fragment root is link-run reachable from the solve root.
  bool merge_fragment(SearchState& state, const ConcreteSpec& frag, bool link_run_scope,
                      std::string& why) {
    auto link_run = frag.link_run_closure(frag.root);
    for (const auto& h : link_run) {
      if (!occupy(state, frag.node(h), link_run_scope, why)) return false;
    }
    for (const auto& [h, n] : frag.nodes) {
      if (!link_run.count(h)) count_node(state, n);
      state.reused.insert(h);
    }
    state.fragments.push_back(frag);
    return true;
  }

  // --- branch generation -------------------------------------------------------

  void search(SearchState state) {
    if (best && state.partial > best->objective) return;  // bound: partial only grows

    if (state.agenda.empty()) {
      complete(std::move(state));
      return;
    }
    auto [depth, name] = *state.agenda.begin();
    state.agenda.erase(state.agenda.begin());
    state.resolved += 1;

    if (state.occupancy.count(name)) {
      // Already satisfied by an imposed closure; nothing to decide.
      search(std::move(state));
      return;
    }
    if (is_virtual_name(name)) {
      branch_virtual(state, name, depth);
    } else {
      branch_package(state, name, depth);
    }
  }

  void branch_virtual(const SearchState& state, const std::string& vname, int depth) {
    std::vector<std::string> order;
    if (auto pref = opts.provider_preference.find(vname); pref != opts.provider_preference.end()) {
      order = pref->second;
    }
    for (const auto& p : repo.providers.at(vname)) {
      if (std::find(order.begin(), order.end(), p) == order.end()) order.push_back(p);
    }

    for (const auto& provider : order) {
      if (!repo.find(provider)) continue;
      stats.decisions += 1;
      SearchState next = state;
      next.binding[vname] = provider;
      next.required_provides[provider].insert(vname);

      std::string why;
      NodeConstraints transferred;
      if (auto slot = state.store.find(vname); slot != state.store.end()) {
        transferred = slot->second.merged;
        transferred.name.clear();
      }
      bool scope = state.slot_scope.count(vname) && state.slot_scope.at(vname);
      if (!impose(next, provider, transferred, "provider of '" + vname + "'", depth, scope, why)) {
        fail_branch(next, provider, why);
        continue;
      }
      if (auto occ = next.occupancy.find(provider); occ != next.occupancy.end()) {
        auto pv = provided_virtuals(repo, next.occupants.at(occ->second));
        if (std::find(pv.begin(), pv.end(), vname) == pv.end()) {
          fail_branch(next, provider, "'" + provider + "' does not provide '" + vname + "'");
          continue;
        }
      }
      search(std::move(next));
    }
    // No unbound fallback: some provider must be chosen for a demanded virtual.
  }

  void branch_package(const SearchState& state, const std::string& name, int depth) {
    const PackageDef* def = repo.find(name);
    NodeConstraints constraints;
    if (auto slot = state.store.find(name); slot != state.store.end()) {
      constraints = slot->second.merged;
      constraints.name.clear();
    }

    if (opts.reuse_enabled && def) branch_reuse(state, name, *def, constraints);
    if (def) branch_fresh(state, name, *def, constraints, depth);

    // Defer: leave the slot to be bound by a later reused closure.
    {
      stats.decisions += 1;
      SearchState next = state;
      next.deferred.insert(name);
      search(std::move(next));
    }
  }

  struct ReuseCandidate {
    std::size_t version_index;
    Hash hash;
  };

  void branch_reuse(const SearchState& state, const std::string& name, const PackageDef& def,
                    const NodeConstraints& constraints) {
    bool scope = state.slot_scope.count(name) && state.slot_scope.at(name);
    std::vector<ReuseCandidate> candidates;
    for (const auto& h : cache.by_name(name)) {
      const CacheEntry* entry = cache.lookup(h);
      const ConcreteNode& root = entry->spec.root_node();
      auto idx = def.version_index(root.version);
      if (!idx) continue;
      // os/target homogeneity binds the link-run closure only.
      if (scope && (root.os != solve_os || root.target != solve_target)) continue;
      bool variants_known = true;
      for (const auto& [vn, vv] : root.variants) {
        if (!def.find_variant(vn)) variants_known = false;
      }
      for (const auto& v : def.variants) {
        if (!root.variants.count(v.name)) variants_known = false;
      }
      if (!variants_known) continue;
      if (!satisfies(root, constraints)) continue;
      if (auto rp = state.required_provides.find(name); rp != state.required_provides.end()) {
        auto pv = provided_virtuals(repo, root);
        bool all = std::all_of(rp->second.begin(), rp->second.end(), [&](const std::string& v) {
          return std::find(pv.begin(), pv.end(), v) != pv.end();
        });
        if (!all) continue;
      }
      candidates.push_back({*idx, h});
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return std::tie(a.version_index, a.hash) < std::tie(b.version_index, b.hash);
    });
    if (opts.max_candidates_per_node && candidates.size() > opts.max_candidates_per_node) {
      candidates.resize(opts.max_candidates_per_node);
    }

    for (const auto& cand : candidates) {
      auto try_plan = [&](const SplicePlan& plan) {
        stats.decisions += 1;
        SearchState next = state;
        Realization realized;
        try {
          realized = realize_reuse(cache, cand.hash, plan);
        } catch (const Error&) {
          stats.backtracks += 1;
          return;
        }
        std::string why;
        if (!merge_fragment(next, realized.spec, scope, why)) {
          fail_branch(next, name, why);
          return;
        }
        next.partial.splice_count += realized.decisions.size();
        for (auto& d : realized.decisions) next.decisions.push_back(std::move(d));
        for (auto& [h, s] : realized.intermediates) next.intermediates.emplace(h, std::move(s));
        search(std::move(next));
      };

      if (opts.splice_enabled) {
        enumerate_splice_plans(cache, repo, cand.hash, opts.max_candidates_per_node, try_plan,
                               scope ? candidate_filter : candidate_filter_build_scope);
      } else {
        try_plan(SplicePlan{});
      }
    }
  }

  void branch_fresh(const SearchState& state, const std::string& name, const PackageDef& def,
                    const NodeConstraints& constraints, int depth) {
    // Constraints naming unknown variants can never be satisfied by a build.
    for (const auto& [vn, vv] : constraints.variants) {
      if (!def.find_variant(vn)) return;
    }
    if (constraints.os && *constraints.os != solve_os) return;
    if (constraints.target && *constraints.target != solve_target) return;

    for (const auto& version : def.versions) {
      if (constraints.version && !constraints.version->accepts(version)) continue;
      std::vector<std::map<std::string, VariantValue>> combos{{}};
      for (const auto& v : def.variants) {
        std::vector<VariantValue> values;
        if (auto pinned = constraints.variants.find(v.name); pinned != constraints.variants.end()) {
          values.push_back(pinned->second);
        } else {
          values = domains.at({name, v.name});
        }
        std::vector<std::map<std::string, VariantValue>> grown;
        for (const auto& combo : combos) {
          for (const auto& value : values) {
            auto c = combo;
            c.emplace(v.name, value);
            grown.push_back(std::move(c));
          }
        }
        combos = std::move(grown);
      }

      for (const auto& variants : combos) {
        attempt_fresh(state, name, def, version, variants, depth);
      }
    }
  }

  void attempt_fresh(const SearchState& state, const std::string& name, const PackageDef& def,
                     const Version& version, const std::map<std::string, VariantValue>& variants,
                     int depth) {
    stats.decisions += 1;
    SearchState next = state;

    ConcreteNode node;
    node.name = name;
    node.version = version;
    node.variants = variants;
    node.os = solve_os;
    node.target = solve_target;
    node.hash = fresh_key(name);

    if (auto rp = state.required_provides.find(name); rp != state.required_provides.end()) {
      auto pv = provided_virtuals(repo, node);
      for (const auto& v : rp->second) {
        if (std::find(pv.begin(), pv.end(), v) == pv.end()) {
          fail_branch(next, name, "'" + name + "@" + version.str() + "' does not provide '" + v + "'");
          return;
        }
      }
    }

    std::string why;
    bool self_scope = state.slot_scope.count(name) && state.slot_scope.at(name);
    if (!occupy(next, node, self_scope, why)) {
      fail_branch(next, name, why);
      return;
    }
    next.partial.builds += 1;
    next.to_build.insert(name);

    FreshChoice choice;
    choice.attrs = node;
    auto active = active_directives(def, PartialNode::of(node));
    for (const auto* d : active.depends_on) {
      const std::string& dep = d->target.name;
      choice.deps.emplace_back(dep, d->kind);
      NodeConstraints target = d->target;
      target.name.clear();
      std::string source = name + "@" + version.str() + " depends_on \"" +
                           format_constraints(d->target) + "\"";
      bool dep_scope = self_scope && d->kind != EdgeKind::build;
      if (is_virtual_name(dep)) {
        if (!impose(next, dep, target, source, depth + 1, dep_scope, why)) {
          fail_branch(next, dep, why);
          return;
        }
        if (auto bound = next.binding.find(dep); bound != next.binding.end()) {
          std::string ignored;
          if (!impose(next, bound->second, target, source, depth + 1, dep_scope, ignored)) {
            fail_branch(next, bound->second, ignored);
            return;
          }
        }
      } else {
        if (!impose(next, dep, target, source, depth + 1, dep_scope, why)) {
          fail_branch(next, dep, why);
          return;
        }
      }
    }
    next.fresh.emplace(name, std::move(choice));
    search(std::move(next));
  }

  // --- completion --------------------------------------------------------------

  std::optional<Hash> resolve_slot(const SearchState& state, std::string name) const {
    if (auto b = state.binding.find(name); b != state.binding.end()) name = b->second;
    auto it = state.occupancy.find(name);
    if (it == state.occupancy.end()) return std::nullopt;
    return it->second;
  }

  void complete(SearchState state) {
    for (const auto& name : state.deferred) {
      if (!state.occupancy.count(name) && !state.binding.count(name)) {
        fail_branch(state, name, "nothing provides deferred package '" + name + "'");
        return;
      }
    }

    ConcreteSpec spec;
    for (const auto& frag : state.fragments) {
      for (const auto& [h, n] : frag.nodes) spec.nodes.insert_or_assign(h, n);
      spec.link_run_edges.insert(frag.link_run_edges.begin(), frag.link_run_edges.end());
      spec.build_edges.insert(frag.build_edges.begin(), frag.build_edges.end());
    }
    for (const auto& [name, choice] : state.fresh) {
      spec.nodes.insert_or_assign(choice.attrs.hash, choice.attrs);
      for (const auto& [dep, kind] : choice.deps) {
        auto target = resolve_slot(state, dep);
        if (!target) {
          fail_branch(state, dep, "dependency '" + dep + "' of '" + name + "' was never resolved");
          return;
        }
        auto& edges = kind == EdgeKind::build ? spec.build_edges : spec.link_run_edges;
        edges.emplace(choice.attrs.hash, *target);
      }
    }
    auto root = resolve_slot(state, request.root.name);
    if (!root) {
      fail_branch(state, request.root.name, "root was never resolved");
      return;
    }
    spec.root = *root;

    // Drop nodes that no chosen fragment or fresh node reaches anymore.
    auto reachable = spec.full_closure(spec.root);
    std::erase_if(spec.nodes, [&](const auto& kv) { return !reachable.count(kv.first); });
    std::erase_if(spec.link_run_edges, [&](const auto& e) {
      return !reachable.count(e.first) || !reachable.count(e.second);
    });
    std::erase_if(spec.build_edges, [&](const auto& e) {
      return !reachable.count(e.first) || !reachable.count(e.second);
    });

    std::map<Hash, Hash> remap;
    try {
      remap = rehash(spec);
      validate(spec);
    } catch (const Error& e) {
      fail_branch(state, request.root.name, std::string("assembled spec invalid: ") + e.what());
      return;
    }

    SolveResult result;
    result.spec = spec;
    for (const auto& h : state.reused) {
      if (auto it = remap.find(h); it != remap.end() && spec.nodes.count(it->second)) {
        result.reused.insert(it->second);
      }
    }
    std::set<std::string> live_names;
    for (const auto& [h, n] : spec.nodes) live_names.insert(n.name);
    for (const auto& name : state.to_build) {
      if (live_names.count(name)) result.to_build.insert(name);
    }
    result.splices = state.decisions;
    result.provenance_specs = state.intermediates;
    result.objective = objective_of(spec, repo, result.to_build, result.splices);

    auto failures = check_solution(spec, request, repo, opts, result.to_build, &domains);
    if (!failures.empty()) {
      std::string reason;
      for (const auto& f : failures) reason += (reason.empty() ? "" : "; ") + f.message;
      fail_branch(state, request.root.name, reason);
      return;
    }

    std::string key = solution_sort_key(result, repo, opts);
    if (!best || result.objective < best->objective ||
        (result.objective == best->objective && key < best_key)) {
      best = std::move(result);
      best_key = std::move(key);
    }
  }

  SolveResult run() {
    if (opts.splice_enabled && !opts.reuse_enabled) {
      throw Error("splice_enabled requires reuse_enabled");
    }
    if (!repo.find(request.root.name) && !repo.is_virtual(request.root.name)) {
      throw UnknownPackageError("unknown package '" + request.root.name + "'");
    }

    solve_os = request.root.os.value_or(opts.default_os);
    solve_target = request.root.target.value_or(opts.default_target);
    domains = variant_domains(repo, request);
    pinned_names = addressable_names(repo, request);
    candidate_filter = [this](std::vector<SpliceCandidate> candidates) {
      return collapse_candidates(std::move(candidates), cache, repo, pinned_names,
                                 opts.forbidden_packages);
    };
    candidate_filter_build_scope = [this](std::vector<SpliceCandidate> candidates) {
      return collapse_candidates(std::move(candidates), cache, repo, pinned_names, {});
    };

    auto start = std::chrono::steady_clock::now();

    SearchState state;
    std::string why;
    NodeConstraints root_c = request.root;
    if (!impose(state, request.root.name, root_c, "request: " + format_constraints(request.root), 0,
                true, why)) {
      throw UnsatisfiableError("unsatisfiable request", {why});
    }
    bool feasible_prefix = true;
    for (const auto& [dep, kind] : request.dependencies) {
      if (!impose(state, dep.name, dep, "request: ^" + format_constraints(dep), 1,
                  kind != EdgeKind::build, why)) {
        deepest_core = state.store[dep.name].sources;
        deepest_core.push_back(why);
        deepest_fail = 0;
        feasible_prefix = false;
        break;
      }
      // Presence constraints do not open slots by themselves.
      if (auto it = state.scheduled.find(dep.name);
          it != state.scheduled.end() && dep.name != request.root.name) {
        state.agenda.erase({it->second, dep.name});
        state.scheduled.erase(it);
      }
    }

    if (feasible_prefix) search(std::move(state));

    auto end = std::chrono::steady_clock::now();
    stats.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();

    if (!best) {
      std::vector<std::string> core = deepest_core;
      if (core.empty()) core.push_back("no feasible assignment for '" + request.root.name + "'");
      throw UnsatisfiableError("no solution for '" + format_spec(request) + "'", core);
    }
    best->stats = stats;
    return std::move(*best);
  }
};

}  // namespace

SolveResult concretize(const AbstractSpec& request, const Repo& repo, const BuildCache& cache,
                       const SolveOptions& opts) {
  Solver solver{request, repo, cache, opts};
  return solver.run();
}

std::string SolveResult::to_json() const {
  json doc;
  doc["objective"] = {{"builds", objective.builds},
                      {"version_penalty", objective.version_penalty},
                      {"default_deviation", objective.default_deviation},
                      {"splices", objective.splice_count}};
  doc["root"] = spec.root.digest;
  doc["spec"] = json::parse(to_canonical_json(spec));
  json reused_doc = json::array();
  for (const auto& h : reused) reused_doc.push_back(h.digest);
  doc["reused"] = std::move(reused_doc);
  json build_doc = json::array();
  for (const auto& n : to_build) build_doc.push_back(n);
  doc["to_build"] = std::move(build_doc);
  json splice_doc = json::array();
  for (const auto& s : splices) {
    splice_doc.push_back({{"parent", s.parent_hash.digest},
                          {"replaced_name", s.replaced_name},
                          {"replaced", s.replaced_hash.digest},
                          {"replacement", s.replacement_hash.digest},
                          {"transitive", s.transitive}});
  }
  doc["splices"] = std::move(splice_doc);
  doc["stats"] = {{"decisions", stats.decisions}, {"backtracks", stats.backtracks}};
  return doc.dump();
}

std::string explain(const SolveResult& result) {
  std::ostringstream out;
  out << "objective: " << result.objective.str() << "\n";

  std::vector<std::string> reused_lines;
  for (const auto& h : result.reused) {
    const auto& n = result.spec.node(h);
    reused_lines.push_back("  " + h.hash8() + " " + n.name + "@" + n.version.str() +
                           (n.spliced() ? " (spliced)" : ""));
  }
  std::sort(reused_lines.begin(), reused_lines.end());
  out << "reused: " << reused_lines.size() << "\n";
  for (const auto& line : reused_lines) out << line << "\n";

  out << "to build: " << result.to_build.size();
  if (!result.to_build.empty()) {
    out << " (";
    bool first = true;
    for (const auto& name : result.to_build) {
      out << (first ? "" : ", ") << name;
      first = false;
    }
    out << ")";
  }
  out << "\n";

  if (result.splices.empty()) {
    out << "splices: []\n";
  } else {
    out << "splices:\n";
    for (const auto& s : result.splices) {
      out << "  parent " << s.parent_hash.hash8() << ": " << s.replaced_name << " "
          << s.replaced_hash.hash8() << " -> " << s.replacement_hash.hash8()
          << (s.transitive ? " (transitive)" : " (intransitive)") << "\n";
    }
  }
  return out.str();
}

std::string explain_json(const SolveResult& result) {
  json doc;
  doc["objective"] = {{"builds", result.objective.builds},
                      {"version_penalty", result.objective.version_penalty},
                      {"default_deviation", result.objective.default_deviation},
                      {"splices", result.objective.splice_count}};
  json reused_doc = json::array();
  for (const auto& h : result.reused) {
    const auto& n = result.spec.node(h);
    reused_doc.push_back({{"hash", h.digest},
                          {"name", n.name},
                          {"version", n.version.str()},
                          {"spliced", n.spliced()}});
  }
  doc["reused"] = std::move(reused_doc);
  json build_doc = json::array();
  for (const auto& n : result.to_build) build_doc.push_back(n);
  doc["to_build"] = std::move(build_doc);
  json splice_doc = json::array();
  for (const auto& s : result.splices) {
    splice_doc.push_back({{"parent", s.parent_hash.digest},
                          {"replaced_name", s.replaced_name},
                          {"replaced", s.replaced_hash.digest},
                          {"replacement", s.replacement_hash.digest},
                          {"transitive", s.transitive}});
  }
  doc["splices"] = std::move(splice_doc);
  return doc.dump();
}

}  // namespace splicekit
