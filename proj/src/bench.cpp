#include "splicekit/bench.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include <json.hpp>

#include "splicekit/concretizer.hpp"
#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"

namespace splicekit {

using nlohmann::json;

namespace {

std::string app_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "app-%03zu", i);
  return buf;
}

std::string replica_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mpiabi-%03zu", i);
  return buf;
}

// Single-node concrete closure with default attrs.
ConcreteSpec leaf_spec(const Repo& repo, const std::string& name, const SolveOptions& opts) {
  const PackageDef* def = repo.find(name);
  ConcreteNode n;
  n.name = name;
  n.version = def->versions.front();
  for (const auto& v : def->variants) n.variants.emplace(v.name, v.default_value);
  n.os = opts.default_os;
  n.target = opts.default_target;
  n.hash = digest_bytes("seed:" + name);
  ConcreteSpec spec;
  spec.nodes.emplace(n.hash, n);
  spec.root = n.hash;
  rehash(spec);
  return spec;
}

}  // namespace

MpiStack generate_mpi_stack(const MpiStackParams& params) {
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<PackageDef> defs;

  PackageDef mpich;
  mpich.name = "mpich";
  mpich.versions = {Version::parse("3.4.3"), Version::parse("3.1")};
  mpich.provides.push_back({"mpi", std::nullopt});
  defs.push_back(mpich);

  for (std::size_t r = 0; r < params.replica_count; ++r) {
    PackageDef replica;
    replica.name = replica_name(r);
    replica.versions = {Version::parse("1.0")};
    replica.provides.push_back({"mpi", std::nullopt});
    CanSplice cs;
    cs.target = parse_node_constraints("mpich@3.4.3");
    replica.can_splice.push_back(std::move(cs));
    defs.push_back(std::move(replica));
  }

  std::vector<std::vector<std::size_t>> app_deps(params.app_count);
  for (std::size_t i = 0; i < params.app_count; ++i) {
    PackageDef app;
    app.name = app_name(i);
    app.versions = {Version::parse("2.1"), Version::parse("2.0")};
    for (std::size_t v = 0; v < params.variant_count; ++v) {
      app.variants.push_back({"opt" + std::to_string(v), VariantValue(true), {}});
    }
    bool has_mpi = i + params.non_mpi_apps < params.app_count;
    if (has_mpi) {
      DependsOn dep;
      dep.target.name = "mpi";
      app.depends_on.push_back(std::move(dep));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (coin(rng) < params.dep_density) {
        DependsOn dep;
        dep.target.name = app_name(j);
        app.depends_on.push_back(std::move(dep));
        app_deps[i].push_back(j);
      }
    }
    defs.push_back(std::move(app));
  }

  for (std::size_t p = 0; p < params.inflated_cache_entries; ++p) {
    PackageDef pad;
    pad.name = "pad-" + std::to_string(p);
    pad.versions = {Version::parse("1.0")};
    defs.push_back(std::move(pad));
  }

  MpiStack stack;
  stack.repo = make_repo(std::move(defs));

  SolveOptions opts;

  // mpich and every replica exist as built specs.
  ConcreteSpec mpich_spec = leaf_spec(stack.repo, "mpich", opts);
  stack.cache.push(mpich_spec);
  for (std::size_t r = 0; r < params.replica_count; ++r) {
    stack.cache.push(leaf_spec(stack.repo, replica_name(r), opts));
  }
  for (std::size_t p = 0; p < params.inflated_cache_entries; ++p) {
    stack.cache.push(leaf_spec(stack.repo, "pad-" + std::to_string(p), opts));
  }

  // Every app was built against mpich@3.4.3 (and its app dependencies).
  std::vector<ConcreteSpec> app_specs(params.app_count);
  for (std::size_t i = 0; i < params.app_count; ++i) {
    const PackageDef* def = stack.repo.find(app_name(i));
    ConcreteNode n;
    n.name = def->name;
    n.version = def->versions.front();
    for (const auto& v : def->variants) n.variants.emplace(v.name, v.default_value);
    n.os = opts.default_os;
    n.target = opts.default_target;
    n.hash = digest_bytes("seed:" + def->name);

    ConcreteSpec spec;
    spec.nodes.emplace(n.hash, n);
    spec.root = n.hash;
    bool has_mpi = i + params.non_mpi_apps < params.app_count;
    if (has_mpi) {
      for (const auto& [h, node] : mpich_spec.nodes) spec.nodes.emplace(h, node);
      spec.link_run_edges.emplace(n.hash, mpich_spec.root);
    }
    for (std::size_t j : app_deps[i]) {
      for (const auto& [h, node] : app_specs[j].nodes) spec.nodes.emplace(h, node);
      spec.link_run_edges.insert(app_specs[j].link_run_edges.begin(),
                                 app_specs[j].link_run_edges.end());
      spec.link_run_edges.emplace(n.hash, app_specs[j].root);
    }
    rehash(spec);
    app_specs[i] = spec;
    stack.cache.push(spec);
  }

  return stack;
}

BenchScenario BenchScenario::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed scenario document: ") + e.what());
  }
  BenchScenario s;
  s.id = doc.value("id", s.id);
  s.stack.app_count = doc.value("app_count", s.stack.app_count);
  s.stack.replica_count = doc.value("replica_count", s.stack.replica_count);
  s.stack.non_mpi_apps = doc.value("non_mpi_apps", s.stack.non_mpi_apps);
  s.stack.variant_count = doc.value("variant_count", s.stack.variant_count);
  s.stack.dep_density = doc.value("dep_density", s.stack.dep_density);
  s.stack.seed = doc.value("seed", s.stack.seed);
  s.stack.inflated_cache_entries = doc.value("inflated_cache_entries", s.stack.inflated_cache_entries);
  s.repetitions = doc.value("repetitions", s.repetitions);
  s.forbid_mpich = doc.value("forbid_mpich", s.forbid_mpich);
  for (const auto& r : doc.value("requests", json::array())) s.requests.push_back(r.get<std::string>());
  return s;
}

std::string BenchScenario::to_json() const {
  json doc;
  doc["id"] = id;
  doc["app_count"] = stack.app_count;
  doc["replica_count"] = stack.replica_count;
  doc["non_mpi_apps"] = stack.non_mpi_apps;
  doc["variant_count"] = stack.variant_count;
  doc["dep_density"] = stack.dep_density;
  doc["seed"] = stack.seed;
  doc["inflated_cache_entries"] = stack.inflated_cache_entries;
  doc["repetitions"] = repetitions;
  doc["forbid_mpich"] = forbid_mpich;
  doc["requests"] = requests;
  return doc.dump(2);
}

std::vector<BenchRow> run_scenario(const BenchScenario& scenario) {
  MpiStack stack = generate_mpi_stack(scenario.stack);

  std::vector<std::string> requests = scenario.requests;
  if (requests.empty()) {
    for (std::size_t i = 0; i < scenario.stack.app_count; ++i) {
      requests.push_back(app_name(i));
      bool has_mpi = i + scenario.stack.non_mpi_apps < scenario.stack.app_count;
      if (has_mpi && scenario.stack.replica_count > 0 && !scenario.forbid_mpich) {
        requests.push_back(app_name(i) + " ^" + replica_name(0));
      }
    }
  }

  std::vector<BenchRow> rows;
  for (const auto& request_text : requests) {
    for (bool splice : {false, true}) {
      for (std::size_t rep = 0; rep < scenario.repetitions; ++rep) {
        BenchRow row;
        row.scenario_id = scenario.id;
        row.request = request_text;
        row.splice = splice;
        row.replicas = scenario.stack.replica_count;
        row.repetition = rep;

        SolveOptions opts;
        opts.reuse_enabled = true;
        opts.splice_enabled = splice;
        if (scenario.forbid_mpich) opts.forbidden_packages.insert("mpich");

        auto start = std::chrono::steady_clock::now();
        try {
          AbstractSpec request = parse_spec(request_text);
          SolveResult result = concretize(request, stack.repo, stack.cache, opts);
          row.status = "ok";
          std::ostringstream obj;
          obj << result.objective.builds << ":" << result.objective.version_penalty << ":"
              << result.objective.default_deviation << ":" << result.objective.splice_count;
          row.objective = obj.str();
          row.splice_count = result.objective.splice_count;
          row.builds = result.objective.builds;
        } catch (const UnsatisfiableError&) {
          row.status = "unsat";
        } catch (const Error& e) {
          row.status = std::string("error:") + e.what();
        }
        auto end = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string csv_header() {
  return "scenario,request,splice,replicas,repetition,status,wall_ms,objective,splice_count,builds";
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << csv_header() << "\n";
  for (const auto& r : rows) {
    out << r.scenario_id << ",\"" << r.request << "\"," << (r.splice ? 1 : 0) << "," << r.replicas
        << "," << r.repetition << "," << r.status << "," << r.wall_ms << "," << r.objective << ","
        << r.splice_count << "," << r.builds << "\n";
  }
  return out.str();
}

}  // namespace splicekit
