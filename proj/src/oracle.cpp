#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "splicekit/concretizer.hpp"
#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"
#include "splicekit/solution.hpp"

// Brute-force reference solver. Everything here is straight enumeration with
// end-of-line validation; it shares the solution semantics (realization,
// objective, key, checks) with the real solver but none of its search,
// propagation, or pruning.

namespace splicekit {

namespace {

constexpr std::size_t kMaxPackages = 8;
constexpr std::size_t kMaxVersions = 4;
constexpr std::size_t kMaxBoolVariants = 3;
constexpr std::size_t kMaxCacheEntries = 32;
constexpr std::size_t kMaxVariantCombos = 32;

struct OracleChoice {
  enum class Kind { fresh, reuse, defer };
  Kind kind = Kind::defer;
  // fresh
  Version version;
  std::map<std::string, VariantValue> variants;
  // reuse
  Hash entry;
  SplicePlan plan;
};

struct OracleState {
  std::map<std::string, OracleChoice> assigned;
  std::map<std::string, std::string> binding;       // virtual -> provider
  std::set<std::string> demanded_packages;
  std::set<std::string> demanded_virtuals;
};

struct Oracle {
  const AbstractSpec& request;
  const Repo& repo;
  const BuildCache& cache;
  const SolveOptions& opts;
  std::string solve_os;
  std::string solve_target;
  VariantDomains domains;

  std::optional<SolveResult> best;
  std::string best_key;
  std::uint64_t evaluated = 0;

  bool name_is_virtual(const std::string& name) const {
    return repo.is_virtual(name) && !repo.find(name);
  }

  void check_bounds() const {
    if (cache.size() > kMaxCacheEntries) {
      throw InstanceTooLargeError("cache has " + std::to_string(cache.size()) + " entries");
    }
    std::set<std::string> reachable;
    std::vector<std::string> work;
    auto push_name = [&](const std::string& name) {
      if (name_is_virtual(name)) {
        for (const auto& p : repo.providers.at(name)) work.push_back(p);
      } else {
        work.push_back(name);
      }
    };
    push_name(request.root.name);
    while (!work.empty()) {
      std::string name = work.back();
      work.pop_back();
      if (!reachable.insert(name).second) continue;
      const PackageDef* def = repo.find(name);
      if (!def) continue;
      for (const auto& d : def->depends_on) push_name(d.target.name);
    }
    if (reachable.size() > kMaxPackages) {
      throw InstanceTooLargeError(std::to_string(reachable.size()) + " reachable packages");
    }
    for (const auto& name : reachable) {
      const PackageDef* def = repo.find(name);
      if (!def) continue;
      if (def->versions.size() > kMaxVersions) {
        throw InstanceTooLargeError("package '" + name + "' declares too many versions");
      }
      std::size_t bools = 0, combos = 1;
      for (const auto& v : def->variants) {
        if (v.default_value.is_bool()) {
          bools += 1;
          combos *= 2;
        } else {
          combos *= std::max<std::size_t>(1, v.allowed.size());
        }
      }
      if (bools > kMaxBoolVariants || combos > kMaxVariantCombos) {
        throw InstanceTooLargeError("package '" + name + "' has too many variant combinations");
      }
    }
  }

  // --- enumeration -----------------------------------------------------------

  void enumerate(OracleState state) {
    // Next undecided virtual, then next undecided package, by name.
    for (const auto& v : state.demanded_virtuals) {
      if (!state.binding.count(v)) {
        for (const auto& provider : repo.providers.at(v)) {
          if (!repo.find(provider)) continue;
          OracleState next = state;
          next.binding[v] = provider;
          next.demanded_packages.insert(provider);
          enumerate(std::move(next));
        }
        return;
      }
    }
    for (const auto& name : state.demanded_packages) {
      if (!state.assigned.count(name)) {
        options_for(state, name);
        return;
      }
    }
    finalize(state);
  }

  void options_for(const OracleState& state, const std::string& name) {
    {
      OracleState next = state;
      next.assigned[name].kind = OracleChoice::Kind::defer;
      enumerate(std::move(next));
    }

    if (opts.reuse_enabled) {
      for (const auto& h : cache.by_name(name)) {
        auto with_plan = [&](const SplicePlan& plan) {
          OracleState next = state;
          OracleChoice choice;
          choice.kind = OracleChoice::Kind::reuse;
          choice.entry = h;
          choice.plan = plan;
          next.assigned[name] = std::move(choice);
          enumerate(std::move(next));
        };
        if (opts.splice_enabled) {
          enumerate_splice_plans(cache, repo, h, opts.max_candidates_per_node, with_plan);
        } else {
          with_plan(SplicePlan{});
        }
      }
    }

    const PackageDef* def = repo.find(name);
    if (!def) return;
    for (const auto& version : def->versions) {
      std::vector<std::map<std::string, VariantValue>> combos{{}};
      for (const auto& v : def->variants) {
        std::vector<VariantValue> values = domains.at({name, v.name});
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
        OracleState next = state;
        OracleChoice choice;
        choice.kind = OracleChoice::Kind::fresh;
        choice.version = version;
        choice.variants = variants;

        ConcreteNode node;
        node.name = name;
        node.version = version;
        node.variants = variants;
        node.os = solve_os;
        node.target = solve_target;
        auto active = active_directives(*def, PartialNode::of(node));
        for (const auto* d : active.depends_on) {
          if (name_is_virtual(d->target.name)) {
            next.demanded_virtuals.insert(d->target.name);
          } else {
            next.demanded_packages.insert(d->target.name);
          }
        }
        next.assigned[name] = std::move(choice);
        enumerate(std::move(next));
      }
    }
  }

  // --- assembly and scoring ----------------------------------------------------

  void finalize(const OracleState& state) {
    evaluated += 1;

    ConcreteSpec spec;
    std::map<std::string, Hash> occupancy;
    std::set<Hash> reused;
    std::set<std::string> to_build;
    std::vector<SpliceDecision> decisions;
    std::map<Hash, ConcreteSpec> intermediates;

    // Reused closures first: their link-run members own their names.
    for (const auto& [name, choice] : state.assigned) {
      if (choice.kind != OracleChoice::Kind::reuse) continue;
      Realization realized;
      try {
        realized = realize_reuse(cache, choice.entry, choice.plan);
      } catch (const Error&) {
        return;
      }
      if (realized.spec.root_node().name != name) return;
      for (const auto& h : realized.spec.link_run_closure(realized.spec.root)) {
        const auto& n = realized.spec.node(h);
        auto [it, inserted] = occupancy.emplace(n.name, h);
        if (!inserted && it->second != h) return;  // two nodes for one name
      }
      for (const auto& [h, n] : realized.spec.nodes) {
        spec.nodes.insert_or_assign(h, n);
        reused.insert(h);
      }
      spec.link_run_edges.insert(realized.spec.link_run_edges.begin(),
                                 realized.spec.link_run_edges.end());
      spec.build_edges.insert(realized.spec.build_edges.begin(), realized.spec.build_edges.end());
      for (auto& d : realized.decisions) decisions.push_back(std::move(d));
      for (auto& [h, s] : realized.intermediates) intermediates.emplace(h, std::move(s));
    }

    // Fresh nodes.
    for (const auto& [name, choice] : state.assigned) {
      if (choice.kind != OracleChoice::Kind::fresh) continue;
      ConcreteNode node;
      node.name = name;
      node.version = choice.version;
      node.variants = choice.variants;
      node.os = solve_os;
      node.target = solve_target;
      node.hash = digest_bytes("oracle-fresh:" + name);
      auto [it, inserted] = occupancy.emplace(name, node.hash);
      if (!inserted) return;
      spec.nodes.insert_or_assign(node.hash, node);
      to_build.insert(name);
    }

    // Edges from fresh nodes to their resolved dependencies.
    for (const auto& [name, choice] : state.assigned) {
      if (choice.kind != OracleChoice::Kind::fresh) continue;
      const PackageDef* def = repo.find(name);
      ConcreteNode node = spec.node(occupancy.at(name));
      auto active = active_directives(*def, PartialNode::of(node));
      for (const auto* d : active.depends_on) {
        std::string dep = d->target.name;
        if (name_is_virtual(dep)) {
          auto b = state.binding.find(dep);
          if (b == state.binding.end()) return;
          dep = b->second;
        }
        auto occ = occupancy.find(dep);
        if (occ == occupancy.end()) return;
        auto& edges = d->kind == EdgeKind::build ? spec.build_edges : spec.link_run_edges;
        edges.emplace(node.hash, occ->second);
      }
    }

    std::string root_name = request.root.name;
    if (name_is_virtual(root_name)) {
      auto b = state.binding.find(root_name);
      if (b == state.binding.end()) return;
      root_name = b->second;
    }
    auto root = occupancy.find(root_name);
    if (root == occupancy.end()) return;
    spec.root = root->second;

    auto reachable = spec.full_closure(spec.root);
    std::erase_if(spec.nodes, [&](const auto& kv) { return !reachable.count(kv.first); });
    std::erase_if(spec.link_run_edges,
                  [&](const auto& e) { return !reachable.count(e.first) || !reachable.count(e.second); });
    std::erase_if(spec.build_edges,
                  [&](const auto& e) { return !reachable.count(e.first) || !reachable.count(e.second); });

    std::map<Hash, Hash> remap;
    try {
      remap = rehash(spec);
      validate(spec);
    } catch (const Error&) {
      return;
    }

    SolveResult result;
    result.spec = spec;
    for (const auto& h : reused) {
      if (auto it = remap.find(h); it != remap.end() && spec.nodes.count(it->second)) {
        result.reused.insert(it->second);
      }
    }
    std::set<std::string> live;
    for (const auto& [h, n] : spec.nodes) live.insert(n.name);
    for (const auto& name : to_build) {
      if (live.count(name)) result.to_build.insert(name);
    }
    result.splices = decisions;
    result.provenance_specs = intermediates;
    result.objective = objective_of(spec, repo, result.to_build, result.splices);

    if (!check_solution(spec, request, repo, opts, result.to_build).empty()) return;

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
    check_bounds();

    solve_os = request.root.os.value_or(opts.default_os);
    solve_target = request.root.target.value_or(opts.default_target);
    domains = variant_domains(repo, request);

    OracleState state;
    if (name_is_virtual(request.root.name)) {
      state.demanded_virtuals.insert(request.root.name);
    } else {
      state.demanded_packages.insert(request.root.name);
    }
    enumerate(std::move(state));

    if (!best) {
      throw UnsatisfiableError("no solution for '" + format_spec(request) + "'",
                               {"exhaustive enumeration found no valid assignment"});
    }
    best->stats.decisions = evaluated;
    return std::move(*best);
  }
};

}  // namespace

SolveResult oracle_solve(const AbstractSpec& request, const Repo& repo, const BuildCache& cache,
                         const SolveOptions& opts) {
  Oracle oracle{request, repo, cache, opts};
  return oracle.run();
}

}  // namespace splicekit
