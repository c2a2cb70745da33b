#include <doctest.h>

#include <thread>

#include "fixtures.hpp"
#include "generators.hpp"
#include "splicekit/concretizer.hpp"
#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"
#include "splicekit/solution.hpp"

using namespace splicekit;

namespace {

std::map<std::string, const ConcreteNode*> closure_by_name(const ConcreteSpec& spec) {
  std::map<std::string, const ConcreteNode*> out;
  for (const auto& [h, n] : spec.nodes) out.emplace(n.name, &n);
  return out;
}

}  // namespace

TEST_SUITE("concretizer") {
  TEST_CASE("conditional repo: example@1.0.0 resolves versions, variants, and the provider") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    SolveResult result = concretize(parse_spec("example@1.0.0"), repo, cache);

    auto nodes = closure_by_name(result.spec);
    REQUIRE(nodes.count("example"));
    REQUIRE(nodes.count("bzip2"));
    REQUIRE(nodes.count("zlib"));
    REQUIRE(nodes.count("mpich"));
    CHECK(nodes.size() == 4);

    CHECK(nodes["example"]->version.str() == "1.0.0");
    CHECK(nodes["example"]->variants.at("bzip") == VariantValue(true));  // default honored
    CHECK(VersionConstraint::exact_or_prefix(Version::parse("1.2")).accepts(nodes["zlib"]->version));
    CHECK(nodes["zlib"]->version.str() == "1.2.11");
    CHECK(nodes["bzip2"]->version.str() == "1.0.8");
    CHECK(nodes["mpich"]->version.str() == "3.4.3");  // newest provider version

    CHECK(result.to_build.size() == 4);
    CHECK(result.reused.empty());
    CHECK(result.objective.builds == 4);
    // example pinned one back, zlib forced to 1.2.x; everything else newest.
    CHECK(result.objective.version_penalty == 2);
    CHECK(result.objective.default_deviation == 0);
    CHECK(result.objective.splice_count == 0);
  }

  TEST_CASE("version choice follows the version-gated constraints") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    SolveResult v110 = concretize(parse_spec("example@1.1.0"), repo, cache);
    auto nodes = closure_by_name(v110.spec);
    CHECK(nodes["zlib"]->version.str() == "1.3.1");

    SolveResult plain = concretize(parse_spec("example"), repo, cache);
    nodes = closure_by_name(plain.spec);
    CHECK(nodes["example"]->version.str() == "1.1.0");  // newest wins
    CHECK(plain.objective.version_penalty == 0);
  }

  TEST_CASE("request variants force deviations from defaults") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    SolveResult result = concretize(parse_spec("example~bzip"), repo, cache);
    auto nodes = closure_by_name(result.spec);
    CHECK(nodes["example"]->variants.at("bzip") == VariantValue(false));
    CHECK_FALSE(nodes.count("bzip2"));  // dependency deactivated
    CHECK(result.objective.default_deviation == 1);
  }

  TEST_CASE("unsatisfiable merges report a conflict core naming both sides") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    try {
      concretize(parse_spec("example@1.0.0 ^zlib@1.3"), repo, cache);
      FAIL("expected UnsatisfiableError");
    } catch (const UnsatisfiableError& e) {
      std::string joined;
      for (const auto& line : e.core) joined += line + "\n";
      CHECK(joined.find("zlib@1.3") != std::string::npos);
      CHECK(joined.find("zlib@1.2") != std::string::npos);
    }
  }

  TEST_CASE("unknown root package") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    CHECK_THROWS_AS(concretize(parse_spec("nonexistent"), repo, cache), UnknownPackageError);
  }

  TEST_CASE("invalid option combinations are rejected") {
    Repo repo = testing::example_repo();
    BuildCache cache;
    SolveOptions opts;
    opts.reuse_enabled = false;
    opts.splice_enabled = true;
    CHECK_THROWS_AS(concretize(parse_spec("example"), repo, cache, opts), Error);
    CHECK_THROWS_AS(oracle_solve(parse_spec("example"), repo, cache, opts), Error);
  }

  TEST_CASE("exact cache hit dominates: request t reuses the whole closure") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = false;
    SolveResult result = concretize(parse_spec("t"), fx.repo, fx.cache, opts);

    CHECK(result.objective.builds == 0);
    CHECK(result.to_build.empty());
    CHECK(result.spec.root == fx.t);
    CHECK(result.reused.size() == 3);
    CHECK(result.splices.empty());

    // Reuse imposition is verbatim: the solved closure is the cached closure.
    CHECK(result.spec == fx.t_spec());
  }

  TEST_CASE("t ^hprime synthesizes the transitive splice") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;
    SolveResult result = concretize(parse_spec("t ^hprime"), fx.repo, fx.cache, opts);

    CHECK(result.objective.builds == 0);
    CHECK(result.to_build.empty());
    REQUIRE(result.splices.size() == 1);
    const SpliceDecision& d = result.splices[0];
    CHECK(d.parent_hash == fx.t);
    CHECK(d.replaced_name == "h");
    CHECK(d.replaced_hash == fx.h);
    CHECK(d.replacement_hash == fx.hprime);
    CHECK(d.transitive);

    ConcreteSpec expected = testing::expected_blue(fx);
    CHECK(result.spec.root == expected.root);
    CHECK(result.spec == expected);
    CHECK(result.objective.splice_count == 1);
  }

  TEST_CASE("t ^hprime ^z@1.0 synthesizes the two-level splice") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;
    SolveResult result = concretize(parse_spec("t ^hprime ^z@1.0"), fx.repo, fx.cache, opts);

    CHECK(result.objective.builds == 0);
    REQUIRE(result.splices.size() == 2);
    CHECK(result.splices[0].parent_hash == fx.t);
    CHECK(result.splices[0].replaced_name == "h");
    CHECK(result.splices[0].transitive);
    CHECK(result.splices[1].parent_hash == fx.hprime);
    CHECK(result.splices[1].replaced_name == "z");
    CHECK(result.splices[1].replaced_hash == fx.z11);
    CHECK(result.splices[1].replacement_hash == fx.z10);
    CHECK_FALSE(result.splices[1].transitive);

    ConcreteSpec expected = testing::expected_red(fx);
    CHECK(result.spec.root == expected.root);
    CHECK(result.spec == expected);

    // The intermediate needed for rewiring chains is carried along.
    ConcreteSpec blue = testing::expected_blue(fx);
    CHECK(result.provenance_specs.count(blue.root) == 1);
  }

  TEST_CASE("splicing disabled keeps t ^hprime unsatisfiable") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = false;
    CHECK_THROWS_AS(concretize(parse_spec("t ^hprime"), fx.repo, fx.cache, opts),
                    UnsatisfiableError);
  }

  TEST_CASE("re-applying recorded decisions reproduces the spliced DAG") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;
    SolveResult result = concretize(parse_spec("t ^hprime ^z@1.0"), fx.repo, fx.cache, opts);

    SplicePlan plan = plan_from_decisions(result.splices, fx.t, fx.cache);
    Realization realized = realize_reuse(fx.cache, fx.t, plan);
    CHECK(realized.spec.root == result.spec.root);
    CHECK(realized.spec == result.spec);
    CHECK(realized.decisions.size() == result.splices.size());
  }

  TEST_CASE("splice_candidates inverts the dependency relation") {
    testing::SpliceFixture fx = testing::splice_fixture();
    const ConcreteNode& h_node = fx.t_spec().node(fx.h);
    auto candidates = splice_candidates(h_node, fx.repo, fx.cache);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].replacement == fx.hprime);
    CHECK(candidates[0].directive->target.name == "h");

    const ConcreteNode& s_node = fx.hprime_spec().node(fx.s);
    CHECK(splice_candidates(s_node, fx.repo, fx.cache).empty());

    // z@1.0 can be replaced by z@1.1 and vice versa.
    auto z10_candidates = splice_candidates(fx.t_spec().node(fx.z10), fx.repo, fx.cache);
    REQUIRE(z10_candidates.size() == 1);
    CHECK(z10_candidates[0].replacement == fx.z11);
    auto z11_candidates = splice_candidates(fx.hprime_spec().node(fx.z11), fx.repo, fx.cache);
    REQUIRE(z11_candidates.size() == 1);
    CHECK(z11_candidates[0].replacement == fx.z10);
  }

  TEST_CASE("oracle agrees on the fixture solves") {
    testing::SpliceFixture fx = testing::splice_fixture();
    Repo example = testing::example_repo();
    BuildCache empty;

    for (const auto* request : {"t", "t ^hprime", "t ^hprime ^z@1.0", "t ^z@1.0"}) {
      SolveOptions opts;
      opts.splice_enabled = true;
      CAPTURE(request);
      SolveResult fast = concretize(parse_spec(request), fx.repo, fx.cache, opts);
      SolveResult slow = oracle_solve(parse_spec(request), fx.repo, fx.cache, opts);
      CHECK(fast.objective == slow.objective);
      CHECK(fast.spec.root == slow.spec.root);
    }
    for (const auto* request : {"example@1.0.0", "example@1.1.0", "example~bzip"}) {
      CAPTURE(request);
      SolveResult fast = concretize(parse_spec(request), example, empty);
      SolveResult slow = oracle_solve(parse_spec(request), example, empty);
      CHECK(fast.objective == slow.objective);
      CHECK(fast.spec.root == slow.spec.root);
    }
    CHECK_THROWS_AS(oracle_solve(parse_spec("example@1.0.0 ^zlib@1.3"), example, empty),
                    UnsatisfiableError);
  }

  TEST_CASE("oracle equivalence over random instances") {
    int solved = 0, unsat = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      CAPTURE(seed);
      testing::RandomInstance inst = testing::random_instance(seed);
      std::optional<SolveResult> fast, slow;
      try {
        fast = concretize(inst.request, inst.repo, inst.cache, inst.opts);
      } catch (const UnsatisfiableError&) {
      }
      try {
        slow = oracle_solve(inst.request, inst.repo, inst.cache, inst.opts);
      } catch (const UnsatisfiableError&) {
      }
      REQUIRE(fast.has_value() == slow.has_value());
      if (fast) {
        CHECK(fast->objective == slow->objective);
        CHECK(fast->spec.root == slow->spec.root);
        solved += 1;
      } else {
        unsat += 1;
      }
    }
    CHECK(solved > 5);  // the generator must produce meaningful instances
  }

  TEST_CASE("oracle rejects oversized instances") {
    std::vector<PackageDef> defs;
    for (int i = 0; i < 10; ++i) {
      PackageDef def;
      def.name = "pkg-" + std::to_string(i);
      def.versions = {Version::parse("1.0")};
      if (i > 0) {
        DependsOn d;
        d.target.name = "pkg-" + std::to_string(i - 1);
        def.depends_on.push_back(d);
      }
      defs.push_back(std::move(def));
    }
    Repo repo = make_repo(std::move(defs));
    BuildCache cache;
    CHECK_THROWS_AS(oracle_solve(parse_spec("pkg-9"), repo, cache), InstanceTooLargeError);
  }

  TEST_CASE("transparency: splicing off equals splicing on over a stripped repo") {
    testing::SpliceFixture fx = testing::splice_fixture();
    Repo stripped = fx.repo;
    for (auto& [name, def] : stripped.packages) def.can_splice.clear();

    for (const auto* request : {"t", "h", "z", "z@1.0"}) {
      CAPTURE(request);
      SolveOptions off;
      off.splice_enabled = false;
      SolveOptions on;
      on.splice_enabled = true;
      SolveResult plain = concretize(parse_spec(request), stripped, fx.cache, off);
      SolveResult spliceable = concretize(parse_spec(request), stripped, fx.cache, on);
      CHECK(plain.spec.root == spliceable.spec.root);
      CHECK(plain.spec == spliceable.spec);
      CHECK(plain.objective == spliceable.objective);
      CHECK(spliceable.splices.empty());
    }
  }

  TEST_CASE("determinism: identical runs produce identical results and stats") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;
    SolveResult a = concretize(parse_spec("t ^hprime"), fx.repo, fx.cache, opts);
    SolveResult b = concretize(parse_spec("t ^hprime"), fx.repo, fx.cache, opts);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.stats.decisions == b.stats.decisions);
    CHECK(a.stats.backtracks == b.stats.backtracks);
  }

  TEST_CASE("forbidden packages push the solver toward splices") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;
    opts.forbidden_packages.insert("h");
    SolveResult result = concretize(parse_spec("t"), fx.repo, fx.cache, opts);
    auto nodes = closure_by_name(result.spec);
    CHECK_FALSE(nodes.count("h"));
    CHECK(nodes.count("hprime"));
    CHECK(result.objective.builds == 0);
    REQUIRE(result.splices.size() == 1);
  }

  TEST_CASE("explain renders frozen decision summaries") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = false;
    SolveResult reuse_all = concretize(parse_spec("t"), fx.repo, fx.cache, opts);
    std::string text = explain(reuse_all);
    CHECK(text.find("splices: []") != std::string::npos);
    CHECK(text.find("to build: 0") != std::string::npos);

    BuildCache empty;
    SolveResult fresh = concretize(parse_spec("h"), fx.repo, empty);
    text = explain(fresh);
    CHECK(text.find("to build: 2 (h, z)") != std::string::npos);

    opts.splice_enabled = true;
    SolveResult spliced = concretize(parse_spec("t ^hprime"), fx.repo, fx.cache, opts);
    text = explain(spliced);
    CHECK(text.find("splices:\n") != std::string::npos);
    CHECK(text.find(fx.t.hash8()) != std::string::npos);
    CHECK(text.find(fx.hprime.hash8()) != std::string::npos);
    CHECK(explain_json(spliced).find("\"transitive\":true") != std::string::npos);
  }

  TEST_CASE("reused provider satisfies virtual dependencies") {
    Repo repo = testing::example_repo();

    // Cache a full example@1.1.0 closure, then re-request it: zero builds.
    BuildCache cache;
    SolveResult fresh = concretize(parse_spec("example@1.1.0"), repo, cache);
    cache.push(fresh.spec);
    SolveResult again = concretize(parse_spec("example@1.1.0"), repo, cache);
    CHECK(again.objective.builds == 0);
    CHECK(again.spec.root == fresh.spec.root);

    // A different root still links against the cached sub-closures.
    SolveResult partial = concretize(parse_spec("example@1.0.0"), repo, cache);
    CHECK(partial.objective.builds < 4);
    auto nodes = closure_by_name(partial.spec);
    CHECK(nodes.count("mpich"));
  }
}

TEST_SUITE("concretizer-properties") {
  // For a reused parent, each cached dependency is either imposed verbatim or
  // replaced by a splice, never both and never neither.
  TEST_CASE("exclusive-or imposition over reused dependencies") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;

    for (const auto* request : {"t", "t ^hprime", "t ^hprime ^z@1.0", "t ^z@1.0"}) {
      CAPTURE(request);
      SolveResult result = concretize(parse_spec(request), fx.repo, fx.cache, opts);

      // Only decisions whose parent is the reused t entry count here; nested
      // decisions replace dependencies of the replacement, not of t.
      std::map<std::string, Hash> replaced_by;  // replaced name -> replacement entry
      for (const auto& d : result.splices) {
        if (d.parent_hash == fx.t) replaced_by[d.replaced_name] = d.replacement_hash;
      }

      // Resolve a node to the cached spec it descends from via provenance.
      auto originates_from = [&](const Hash& h, const Hash& cached) {
        Hash cur = h;
        while (true) {
          if (cur == cached) return true;
          auto it = result.spec.nodes.find(cur);
          std::optional<Hash> back;
          if (it != result.spec.nodes.end()) {
            back = it->second.build_spec_hash;
          } else if (auto prov = result.provenance_specs.find(cur);
                     prov != result.provenance_specs.end()) {
            back = prov->second.root_node().build_spec_hash;
          } else if (const CacheEntry* e = fx.cache.lookup(cur)) {
            back = e->spec.root_node().build_spec_hash;
          }
          if (!back) return false;
          cur = *back;
        }
      };

      const CacheEntry* parent = fx.cache.lookup(fx.t);
      for (const auto& c : parent->spec.link_run_children(fx.t)) {
        const std::string& dep_name = parent->spec.node(c).name;
        bool original_present = result.spec.nodes.count(c) > 0;
        auto spliced = replaced_by.find(dep_name);
        if (spliced == replaced_by.end()) {
          // Not explicitly spliced: either imposed verbatim or superseded by a
          // transitive tie-break, in which case the name is still resolved.
          bool name_resolved = false;
          for (const auto& [h, n] : result.spec.nodes) name_resolved |= n.name == dep_name;
          CHECK(name_resolved);
        } else {
          CHECK_FALSE(original_present);
          bool replacement_present = false;
          for (const auto& [h, n] : result.spec.nodes) {
            replacement_present |= originates_from(h, spliced->second);
          }
          CHECK(replacement_present);
        }
      }
    }
  }

  TEST_CASE("parallel solves over shared snapshots agree") {
    testing::SpliceFixture fx = testing::splice_fixture();
    SolveOptions opts;
    opts.splice_enabled = true;

    std::vector<std::string> results(8);
    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i) {
      workers.emplace_back([&, i] {
        const char* request = i % 2 ? "t ^hprime" : "t ^hprime ^z@1.0";
        results[i] = concretize(parse_spec(request), fx.repo, fx.cache, opts).to_json();
      });
    }
    for (auto& w : workers) w.join();
    for (int i = 2; i < 8; ++i) CHECK(results[i] == results[i - 2]);
  }

  TEST_CASE("single package, no dependencies") {
    PackageDef solo;
    solo.name = "solo";
    solo.versions = {Version::parse("1.0")};
    Repo repo = make_repo({solo});
    BuildCache cache;
    SolveResult fast = concretize(parse_spec("solo"), repo, cache);
    SolveResult slow = oracle_solve(parse_spec("solo"), repo, cache);
    CHECK(fast.objective.builds == 1);
    CHECK(fast.spec.nodes.size() == 1);
    CHECK(fast.spec.root == slow.spec.root);
    CHECK(fast.objective == slow.objective);
  }

  TEST_CASE("no hash collisions across the fixture corpus") {
    testing::SpliceFixture fx = testing::splice_fixture();
    std::map<Hash, std::string> seen;
    auto ingest = [&](const ConcreteSpec& spec) {
      for (const auto& [h, n] : spec.nodes) {
        std::string identity = to_canonical_json(spec.subspec(h));
        auto [it, inserted] = seen.emplace(h, identity);
        if (!inserted) CHECK(it->second == identity);
      }
    };
    for (const auto& [h, entry] : fx.cache.entries()) ingest(entry.spec);
    ingest(testing::expected_blue(fx));
    ingest(testing::expected_red(fx));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      testing::RandomInstance inst = testing::random_instance(seed);
      for (const auto& [h, entry] : inst.cache.entries()) ingest(entry.spec);
    }
    CHECK(seen.size() > 10);
  }
}

TEST_CASE("provider preference overrides the alphabetical default") {
  std::vector<PackageDef> defs;
  PackageDef app;
  app.name = "app";
  app.versions = {Version::parse("1.0")};
  DependsOn d;
  d.target = parse_node_constraints("vio");
  app.depends_on.push_back(d);
  defs.push_back(app);
  for (const auto* provider : {"aio", "bio"}) {
    PackageDef p;
    p.name = provider;
    p.versions = {Version::parse("1.0")};
    p.provides.push_back({"vio", std::nullopt});
    defs.push_back(std::move(p));
  }
  Repo repo = make_repo(std::move(defs));
  BuildCache cache;

  SolveResult by_name = concretize(parse_spec("app"), repo, cache);
  bool has_aio = false;
  for (const auto& [h, n] : by_name.spec.nodes) has_aio |= n.name == "aio";
  CHECK(has_aio);

  SolveOptions prefer_bio;
  prefer_bio.provider_preference["vio"] = {"bio"};
  SolveResult preferred = concretize(parse_spec("app"), repo, cache, prefer_bio);
  bool has_bio = false;
  for (const auto& [h, n] : preferred.spec.nodes) has_bio |= n.name == "bio";
  CHECK(has_bio);

  // The oracle honors the same preference semantics.
  SolveResult oracle_pref = oracle_solve(parse_spec("app"), repo, cache, prefer_bio);
  CHECK(oracle_pref.spec.root == preferred.spec.root);
  SolveResult oracle_plain = oracle_solve(parse_spec("app"), repo, cache);
  CHECK(oracle_plain.spec.root == by_name.spec.root);
}

TEST_CASE("late impositions backtrack earlier choices") {
  // r needs both a and b; b pins a to the older version. The a slot resolves
  // first, so the newest-first choice must be revised when b's constraint
  // lands.
  std::vector<PackageDef> defs;
  PackageDef r;
  r.name = "r";
  r.versions = {Version::parse("1.0")};
  DependsOn d;
  d.target = parse_node_constraints("a");
  r.depends_on.push_back(d);
  d.target = parse_node_constraints("b");
  r.depends_on.push_back(d);
  defs.push_back(r);

  PackageDef a;
  a.name = "a";
  a.versions = {Version::parse("2.1"), Version::parse("2.0")};
  defs.push_back(a);

  PackageDef b;
  b.name = "b";
  b.versions = {Version::parse("1.0")};
  d.target = parse_node_constraints("a@2.0");
  b.depends_on.push_back(d);
  defs.push_back(b);

  Repo repo = make_repo(std::move(defs));
  BuildCache cache;
  SolveResult fast = concretize(parse_spec("r"), repo, cache);
  SolveResult slow = oracle_solve(parse_spec("r"), repo, cache);
  CHECK(fast.objective == slow.objective);
  CHECK(fast.spec.root == slow.spec.root);
  for (const auto& [h, n] : fast.spec.nodes) {
    if (n.name == "a") CHECK(n.version.str() == "2.0");
  }
}

TEST_CASE("a dependency can be satisfied by another entry's spliced closure") {
  // x needs a and t; t's cached closure contains a, and splicing w inside it
  // rebuilds a. The only zero-extra-build solution leaves the a slot to be
  // bound by t's realization.
  std::vector<PackageDef> defs;
  auto pkg = [](const std::string& name) {
    PackageDef def;
    def.name = name;
    def.versions = {Version::parse("1")};
    return def;
  };
  PackageDef x = pkg("x");
  DependsOn d;
  d.target = parse_node_constraints("a");
  x.depends_on.push_back(d);
  d.target = parse_node_constraints("t");
  x.depends_on.push_back(d);
  defs.push_back(x);

  PackageDef t = pkg("t");
  d.target = parse_node_constraints("a");
  t.depends_on.push_back(d);
  defs.push_back(t);

  PackageDef a = pkg("a");
  d.target = parse_node_constraints("w");
  a.depends_on.push_back(d);
  defs.push_back(a);

  defs.push_back(pkg("w"));
  PackageDef wprime = pkg("wprime");
  CanSplice cs;
  cs.target = parse_node_constraints("w@1");
  wprime.can_splice.push_back(cs);
  defs.push_back(wprime);

  Repo repo = make_repo(std::move(defs));

  BuildCache cache;
  {
    testing::SpecBuilder b;
    auto tn = b.add("t", "1");
    auto an = b.add("a", "1");
    auto wn = b.add("w", "1");
    b.link(tn, an);
    b.link(an, wn);
    b.set_root(tn);
    cache.push(b.finish());
  }
  {
    testing::SpecBuilder b;
    auto wp = b.add("wprime", "1");
    b.set_root(wp);
    cache.push(b.finish());
  }

  SolveOptions opts;
  opts.splice_enabled = true;
  SolveResult fast = concretize(parse_spec("x ^wprime"), repo, cache, opts);
  SolveResult slow = oracle_solve(parse_spec("x ^wprime"), repo, cache, opts);
  CHECK(fast.objective == slow.objective);
  CHECK(fast.spec.root == slow.spec.root);
  CHECK(fast.objective.builds == 1);  // only x itself
  CHECK(fast.to_build == std::set<std::string>{"x"});
  Hash t_entry, spliced_t;
  for (const auto& [h, n] : fast.spec.nodes) {
    if (n.name == "a") CHECK(n.spliced());
    if (n.name == "t") spliced_t = h;
  }
  t_entry = cache.by_name("t").front();

  // The deep decision's parent is the kept dependency's own entry, and
  // re-applying the recorded plan reproduces the spliced subtree.
  REQUIRE(fast.splices.size() == 1);
  REQUIRE(cache.lookup(fast.splices[0].parent_hash));
  CHECK(cache.lookup(fast.splices[0].parent_hash)->spec.root_node().name == "a");
  SplicePlan plan = plan_from_decisions(fast.splices, t_entry, cache);
  Realization realized = realize_reuse(cache, t_entry, plan);
  CHECK(realized.spec.root == spliced_t);
}

TEST_CASE("build dependencies solve and honor request constraints") {
  std::vector<PackageDef> defs;
  PackageDef top;
  top.name = "top";
  top.versions = {Version::parse("1.0")};
  DependsOn d;
  d.target = parse_node_constraints("buildtool@3:");
  d.kind = EdgeKind::build;
  top.depends_on.push_back(d);
  defs.push_back(top);

  PackageDef tool;
  tool.name = "buildtool";
  tool.versions = {Version::parse("3.20"), Version::parse("3.1")};
  defs.push_back(tool);

  Repo repo = make_repo(std::move(defs));
  BuildCache cache;

  SolveResult fast = concretize(parse_spec("top %buildtool@3.20"), repo, cache);
  SolveResult slow = oracle_solve(parse_spec("top %buildtool@3.20"), repo, cache);
  CHECK(fast.objective == slow.objective);
  CHECK(fast.spec.root == slow.spec.root);
  CHECK(fast.spec.build_edges.size() == 1);
  CHECK(fast.spec.link_run_edges.empty());

  CHECK_THROWS_AS(concretize(parse_spec("top %buildtool@4:"), repo, cache), UnsatisfiableError);
  CHECK_THROWS_AS(oracle_solve(parse_spec("top %buildtool@4:"), repo, cache), UnsatisfiableError);
}

TEST_CASE("forbidden packages apply to the link-run graph, not build subgraphs") {
  std::vector<PackageDef> defs;
  PackageDef alpha;
  alpha.name = "alpha";
  alpha.versions = {Version::parse("2.1")};
  DependsOn d;
  d.target = parse_node_constraints("bravo");
  alpha.depends_on.push_back(d);
  defs.push_back(alpha);

  PackageDef bravo;
  bravo.name = "bravo";
  bravo.versions = {Version::parse("2.1")};
  d.target = parse_node_constraints("carol");
  d.kind = EdgeKind::build;
  bravo.depends_on.push_back(d);
  defs.push_back(bravo);

  PackageDef carol;
  carol.name = "carol";
  carol.versions = {Version::parse("2.1")};
  defs.push_back(carol);

  Repo repo = make_repo(std::move(defs));
  BuildCache cache;
  SolveOptions opts;
  opts.forbidden_packages.insert("carol");

  // carol is only ever a build dependency here, so forbidding it from the
  // link-run graph must not make the request unsatisfiable.
  SolveResult fast = concretize(parse_spec("alpha"), repo, cache, opts);
  SolveResult slow = oracle_solve(parse_spec("alpha"), repo, cache, opts);
  CHECK(fast.objective == slow.objective);
  CHECK(fast.spec.root == slow.spec.root);
  CHECK(fast.objective.builds == 3);
  CHECK(fast.spec.build_edges.size() == 1);

  // As a link-run dependency the same name stays forbidden.
  PackageDef linked = repo.packages.at("bravo");
  linked.depends_on[0].kind = EdgeKind::link_run;
  Repo repo2 = make_repo({repo.packages.at("alpha"), linked, repo.packages.at("carol")});
  CHECK_THROWS_AS(concretize(parse_spec("alpha"), repo2, cache, opts), UnsatisfiableError);
  CHECK_THROWS_AS(oracle_solve(parse_spec("alpha"), repo2, cache, opts), UnsatisfiableError);
}
