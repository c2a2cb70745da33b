#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "splicekit/bench.hpp"
#include "splicekit/buildcache.hpp"
#include "splicekit/concretizer.hpp"
#include "splicekit/errors.hpp"
#include "splicekit/installer.hpp"
#include "splicekit/parser.hpp"
#include "splicekit/repo.hpp"
#include "splicekit/solution.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace splicekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // unsatisfiable, verification failure, io error
constexpr int kExitUsage = 2;    // bad arguments or spec syntax

struct GlobalConfig {
  std::string repo_path;
  std::vector<std::string> cache_paths;
  std::string tree_path;
  std::string format = "text";

  bool json() const { return format == "json"; }
};

void print_parse_error(const std::string& text, const ParseError& e) {
  std::cerr << "error: " << e.what() << "\n";
  std::cerr << "  " << text << "\n";
  std::cerr << "  " << std::string(std::min(e.position, text.size()), ' ') << "^\n";
  if (!e.expected.empty()) {
    std::cerr << "expected: ";
    for (std::size_t i = 0; i < e.expected.size(); ++i) {
      std::cerr << (i ? ", " : "") << e.expected[i];
    }
    std::cerr << "\n";
  }
}

Repo load_repo_or_die(const GlobalConfig& cfg) {
  if (cfg.repo_path.empty()) {
    throw Error("no package repository configured (use --repo or SPLICEKIT_REPO)");
  }
  Repo repo = load_repo(cfg.repo_path);
  for (const auto& warning : repo.warnings) std::cerr << "warning: " << warning << "\n";
  return repo;
}

// All configured caches merged into one in-memory index, first path primary.
BuildCache merged_caches(const GlobalConfig& cfg) {
  BuildCache merged;
  for (const auto& path : cfg.cache_paths) {
    BuildCache disk{fs::path(path)};
    for (const auto& [h, entry] : disk.entries()) {
      merged.push(entry.spec, entry.artifact, entry.source);
    }
  }
  return merged;
}

json constraints_doc(const NodeConstraints& c) {
  json doc;
  doc["name"] = c.name;
  if (c.version) doc["version"] = c.version->str();
  if (!c.variants.empty()) {
    json vars = json::object();
    for (const auto& [name, value] : c.variants) {
      if (value.is_bool()) {
        vars[name] = value.as_bool();
      } else {
        vars[name] = value.as_string();
      }
    }
    doc["variants"] = std::move(vars);
  }
  if (c.os) doc["os"] = *c.os;
  if (c.target) doc["target"] = *c.target;
  return doc;
}

int cmd_spec(const GlobalConfig& cfg, const std::string& text) {
  AbstractSpec spec;
  try {
    spec = parse_spec(text);
  } catch (const ParseError& e) {
    print_parse_error(text, e);
    return kExitUsage;
  }
  if (cfg.json()) {
    json doc;
    doc["root"] = constraints_doc(spec.root);
    json deps = json::array();
    for (const auto& [dep, kind] : spec.dependencies) {
      json dd = constraints_doc(dep);
      dd["kind"] = edge_kind_name(kind);
      deps.push_back(std::move(dd));
    }
    doc["dependencies"] = std::move(deps);
    std::cout << doc.dump() << "\n";
  } else {
    std::cout << format_spec(spec) << "\n";
  }
  return kExitOk;
}

std::string node_marker(const SolveResult& result, const Hash& h) {
  const ConcreteNode& n = result.spec.node(h);
  if (n.spliced()) return "splice";
  if (result.reused.count(h)) return "reuse";
  return "build";
}

void print_tree(const SolveResult& result) {
  const ConcreteSpec& spec = result.spec;
  auto link_run = spec.link_run_closure(spec.root);
  std::cout << "[" << node_marker(result, spec.root) << "]  " << format_node(spec.root_node())
            << "\n";
  std::vector<Hash> rest;
  for (const auto& [h, n] : spec.nodes) {
    if (h != spec.root) rest.push_back(h);
  }
  std::sort(rest.begin(), rest.end(), [&](const Hash& a, const Hash& b) {
    return std::tie(spec.node(a).name, a) < std::tie(spec.node(b).name, b);
  });
  for (const auto& h : rest) {
    std::cout << "[" << node_marker(result, h) << "]      " << (link_run.count(h) ? "^" : "%")
              << format_node(spec.node(h)) << "\n";
  }
}

int cmd_concretize(const GlobalConfig& cfg, const std::string& text, const SolveOptions& opts) {
  AbstractSpec request;
  try {
    request = parse_spec(text);
  } catch (const ParseError& e) {
    print_parse_error(text, e);
    return kExitUsage;
  }
  Repo repo = load_repo_or_die(cfg);
  BuildCache cache = merged_caches(cfg);
  try {
    SolveResult result = concretize(request, repo, cache, opts);
    if (cfg.json()) {
      std::cout << result.to_json() << "\n";
    } else {
      print_tree(result);
      std::cout << "\n" << explain(result);
    }
    return kExitOk;
  } catch (const UnsatisfiableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "conflicting constraints:\n";
    for (const auto& line : e.core) std::cerr << "  - " << line << "\n";
    return kExitFailure;
  }
}

int cmd_install(const GlobalConfig& cfg, const std::string& text, const SolveOptions& opts) {
  AbstractSpec request;
  try {
    request = parse_spec(text);
  } catch (const ParseError& e) {
    print_parse_error(text, e);
    return kExitUsage;
  }
  if (cfg.tree_path.empty()) {
    throw Error("no install tree configured (use --tree or SPLICEKIT_TREE)");
  }
  Repo repo = load_repo_or_die(cfg);
  BuildCache cache = merged_caches(cfg);
  std::optional<BuildCache> primary;
  if (!cfg.cache_paths.empty()) primary.emplace(fs::path(cfg.cache_paths.front()));

  SolveResult result;
  try {
    result = concretize(request, repo, cache, opts);
  } catch (const UnsatisfiableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& line : e.core) std::cerr << "  - " << line << "\n";
    return kExitFailure;
  }

  InstallTree tree{fs::path(cfg.tree_path)};
  const ConcreteSpec& spec = result.spec;

  // Dependencies first; spliced nodes are rewired after everything else.
  std::vector<Hash> order;
  {
    std::set<Hash> seen;
    std::function<void(const Hash&)> visit = [&](const Hash& h) {
      if (!seen.insert(h).second) return;
      for (const auto& c : spec.link_run_children(h)) visit(c);
      for (const auto& c : spec.build_children(h)) visit(c);
      order.push_back(h);
    };
    visit(spec.root);
  }

  std::map<Hash, std::string> actions;
  for (const auto& h : order) {
    const ConcreteNode& n = spec.node(h);
    if (n.spliced()) {
      actions[h] = "rewired";
      continue;
    }
    if (tree.installed(h)) {
      actions[h] = "present";
      continue;
    }
    const CacheEntry* entry = cache.lookup(h);
    if (entry && entry->artifact) {
      install(*entry, tree, cache);
      actions[h] = "reused";
    } else {
      ConcreteSpec sub = spec.subspec(h);
      std::string bytes = build_mock(sub, tree);
      cache.push(sub, bytes);
      if (primary) primary->push(sub, bytes);
      fs::path prefix = tree.prefix_for(n);
      fs::create_directories(prefix);
      std::ofstream out(prefix / "bin", std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      tree.register_install(h, prefix);
      actions[h] = "built";
    }
  }
  fs::path root_prefix = rewire(spec, tree, cache, result.provenance_specs);
  for (const auto& h : order) {
    const ConcreteNode& n = spec.node(h);
    if (!n.spliced()) continue;
    auto prefix = tree.prefix_of(h);
    if (prefix && primary) {
      std::ifstream in(*prefix / "bin", std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      primary->push(spec.subspec(h), buf.str(), EntrySource::rewired);
      for (const auto& [bh, bspec] : result.provenance_specs) primary->push(bspec);
    }
  }

  VerificationReport report = verify_install(root_prefix, tree, spec);

  if (cfg.json()) {
    json doc;
    json nodes = json::array();
    for (const auto& h : order) {
      const ConcreteNode& n = spec.node(h);
      nodes.push_back({{"name", n.name},
                       {"version", n.version.str()},
                       {"hash", h.digest},
                       {"action", actions[h]},
                       {"prefix", tree.prefix_of(h) ? tree.prefix_of(h)->string() : ""}});
    }
    doc["nodes"] = std::move(nodes);
    doc["verify"] = json::parse(report.to_json());
    std::cout << doc.dump() << "\n";
  } else {
    for (const auto& h : order) {
      const ConcreteNode& n = spec.node(h);
      std::cout << actions[h] << "  " << n.name << "@" << n.version.str() << " /" << h.hash8()
                << "\n";
    }
    std::cout << (report.ok() ? "verify: ok" : "verify: FAILED") << " (" << report.nodes_checked
              << " nodes)\n";
    for (const auto& f : report.failures) {
      std::cout << "  " << f.node.hash8() << ": " << f.message << "\n";
    }
  }
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_cache_list(const GlobalConfig& cfg) {
  BuildCache cache = merged_caches(cfg);
  std::vector<std::string> lines;
  for (const auto& [h, entry] : cache.entries()) {
    const ConcreteNode& n = entry.spec.root_node();
    std::ostringstream line;
    line << n.name << "@" << n.version.str() << " /" << h.hash8()
         << (entry.artifact ? "" : " (spec only)")
         << (entry.source == EntrySource::rewired ? " [rewired]" : "");
    lines.push_back(line.str());
  }
  std::sort(lines.begin(), lines.end());
  if (cfg.json()) {
    json doc = json::array();
    for (const auto& [h, entry] : cache.entries()) {
      const ConcreteNode& n = entry.spec.root_node();
      doc.push_back({{"name", n.name},
                     {"version", n.version.str()},
                     {"hash", h.digest},
                     {"installable", entry.artifact.has_value()},
                     {"source", entry.source == EntrySource::rewired ? "rewired" : "built"}});
    }
    std::cout << doc.dump() << "\n";
  } else {
    for (const auto& line : lines) std::cout << line << "\n";
  }
  return kExitOk;
}

int cmd_cache_push(const GlobalConfig& cfg, const std::string& text, const SolveOptions& opts) {
  AbstractSpec request;
  try {
    request = parse_spec(text);
  } catch (const ParseError& e) {
    print_parse_error(text, e);
    return kExitUsage;
  }
  if (cfg.cache_paths.empty()) {
    throw Error("no cache configured (use --cache or SPLICEKIT_CACHE)");
  }
  Repo repo = load_repo_or_die(cfg);
  BuildCache merged = merged_caches(cfg);
  BuildCache primary{fs::path(cfg.cache_paths.front())};

  SolveResult result;
  try {
    result = concretize(request, repo, merged, opts);
  } catch (const UnsatisfiableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  // Mock-build the whole closure bottom-up into a scratch tree.
  fs::path scratch = fs::temp_directory_path() / ("splicekit-build-" + result.spec.root.hash8());
  fs::create_directories(scratch);
  InstallTree tree{scratch};
  std::vector<Hash> order;
  {
    std::set<Hash> seen;
    std::function<void(const Hash&)> visit = [&](const Hash& h) {
      if (!seen.insert(h).second) return;
      for (const auto& c : result.spec.link_run_children(h)) visit(c);
      for (const auto& c : result.spec.build_children(h)) visit(c);
      order.push_back(h);
    };
    visit(result.spec.root);
  }
  std::size_t pushed = 0, already = 0;
  for (const auto& h : order) {
    ConcreteSpec sub = result.spec.subspec(h);
    if (const CacheEntry* existing = primary.lookup(h); existing && existing->artifact) {
      already += 1;
      tree.register_install(h, tree.prefix_for(result.spec.node(h)));
      continue;
    }
    std::string bytes = build_mock(sub, tree);
    fs::path prefix = tree.prefix_for(result.spec.node(h));
    fs::create_directories(prefix);
    std::ofstream out(prefix / "bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    tree.register_install(h, prefix);
    primary.push(sub, bytes);
    pushed += 1;
  }
  if (pushed == 0) {
    std::cout << "already present: " << result.spec.root.hash8() << "\n";
  } else {
    std::cout << "pushed " << pushed << " entries (root " << result.spec.root.hash8() << ")\n";
  }
  fs::remove_all(scratch);
  return kExitOk;
}

int cmd_bench(const std::string& scenario_path, const std::string& out_path) {
  BenchScenario scenario;
  if (!scenario_path.empty()) {
    std::ifstream in(scenario_path);
    if (!in) throw IoError("cannot read scenario " + scenario_path);
    std::stringstream buf;
    buf << in.rdbuf();
    scenario = BenchScenario::from_json(buf.str());
  }
  auto rows = run_scenario(scenario);
  std::string csv = to_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << csv;
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splice-aware package manager"};
  app.require_subcommand(1);

  GlobalConfig cfg;
  app.add_option("--repo", cfg.repo_path, "package repository path")->envname("SPLICEKIT_REPO");
  app.add_option("--cache", cfg.cache_paths, "build cache path (repeatable, first is primary)")
      ->envname("SPLICEKIT_CACHE");
  app.add_option("--tree", cfg.tree_path, "install tree root")->envname("SPLICEKIT_TREE");
  app.add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  SolveOptions opts;
  std::vector<std::string> forbid;
  auto add_solver_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--reuse,!--no-reuse", opts.reuse_enabled, "reuse cached specs");
    cmd->add_flag("--splice,!--no-splice", opts.splice_enabled, "consider spliced solutions");
    cmd->add_option("--max-candidates", opts.max_candidates_per_node,
                    "cap reuse/splice candidates per node (0 = unlimited)");
    cmd->add_option("--seed", opts.deterministic_seed, "deterministic seed");
    cmd->add_option("--os", opts.default_os, "default os label");
    cmd->add_option("--target", opts.default_target, "default target label");
    cmd->add_option("--forbid", forbid, "package names that must not appear");
  };

  std::string spec_text;
  auto* spec_cmd = app.add_subcommand("spec", "parse and echo a spec");
  spec_cmd->add_option("spec", spec_text, "spec string")->required();

  std::string conc_text;
  auto* conc_cmd = app.add_subcommand("concretize", "resolve a spec against the repo and caches");
  conc_cmd->add_option("spec", conc_text, "spec string")->required();
  add_solver_flags(conc_cmd);

  std::string install_text;
  auto* install_cmd = app.add_subcommand("install", "concretize, build or reuse, install, verify");
  install_cmd->add_option("spec", install_text, "spec string")->required();
  add_solver_flags(install_cmd);

  auto* cache_cmd = app.add_subcommand("cache", "build cache operations");
  cache_cmd->require_subcommand(1);
  auto* cache_list_cmd = cache_cmd->add_subcommand("list", "list cache entries");
  std::string push_text;
  auto* cache_push_cmd = cache_cmd->add_subcommand("push", "concretize, mock-build, and push");
  cache_push_cmd->add_option("spec", push_text, "spec string")->required();
  add_solver_flags(cache_push_cmd);

  std::string scenario_path, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark scenario, emit CSV");
  bench_cmd->add_option("--scenario", scenario_path, "scenario JSON file");
  bench_cmd->add_option("--out", bench_out, "CSV output path (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& name : forbid) opts.forbidden_packages.insert(name);

  try {
    if (*spec_cmd) return cmd_spec(cfg, spec_text);
    if (*conc_cmd) return cmd_concretize(cfg, conc_text, opts);
    if (*install_cmd) return cmd_install(cfg, install_text, opts);
    if (*cache_list_cmd) return cmd_cache_list(cfg);
    if (*cache_push_cmd) return cmd_cache_push(cfg, push_text, opts);
    if (*bench_cmd) return cmd_bench(scenario_path, bench_out);
  } catch (const UnknownPackageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
