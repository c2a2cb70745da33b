#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "splicekit/buildcache.hpp"
#include "splicekit/errors.hpp"

using namespace splicekit;
using splicekit::testing::SpecBuilder;

namespace fs = std::filesystem;

TEST_SUITE("buildcache-store") {
  TEST_CASE("push then lookup returns a structurally equal spec") {
    testing::SpliceFixture fx = testing::splice_fixture();
    const CacheEntry* entry = fx.cache.lookup(fx.t);
    REQUIRE(entry);
    CHECK(entry->spec.nodes.size() == 3);
    CHECK(entry->spec.root == fx.t);
    CHECK(to_canonical_json(entry->spec) == to_canonical_json(fx.cache.lookup(fx.t)->spec));
  }

  TEST_CASE("pushing the four fixture closures leaves two entries under z") {
    testing::SpliceFixture fx = testing::splice_fixture();
    CHECK(fx.cache.by_name("z").size() == 2);
    CHECK(fx.cache.by_name("t").size() == 1);
    CHECK(fx.cache.by_name("hprime").size() == 1);
    CHECK(fx.cache.by_name("nothing").empty());
  }

  TEST_CASE("push is idempotent") {
    testing::SpliceFixture fx = testing::splice_fixture();
    std::size_t before = fx.cache.size();
    Hash again = fx.cache.push(fx.cache.lookup(fx.t)->spec);
    CHECK(again == fx.t);
    CHECK(fx.cache.size() == before);
  }

  TEST_CASE("push rejects tampered hashes") {
    SpecBuilder b;
    auto n = b.add("solo", "1");
    b.set_root(n);
    ConcreteSpec spec = b.finish();
    auto node = spec.nodes.begin()->second;
    spec.nodes.clear();
    node.hash = digest_bytes("lie");
    spec.nodes.emplace(node.hash, node);
    spec.root = node.hash;
    BuildCache cache;
    CHECK_THROWS_AS(cache.push(spec), HashMismatchError);
  }

  TEST_CASE("artifact attaches to the root entry and upgrades spec-only entries") {
    testing::SpliceFixture fx = testing::splice_fixture();
    CHECK_FALSE(fx.cache.lookup(fx.t)->artifact.has_value());
    fx.cache.push(fx.cache.lookup(fx.t)->spec, std::string("bytes"));
    CHECK(fx.cache.lookup(fx.t)->artifact == "bytes");
    CHECK_FALSE(fx.cache.lookup(fx.h)->artifact.has_value());
  }

  TEST_CASE("durability: reopening a store reproduces the index") {
    fs::path dir = fs::temp_directory_path() / "splicekit-test-store";
    fs::remove_all(dir);
    {
      BuildCache store{dir};
      testing::SpliceFixture fx = testing::splice_fixture();
      store.push(fx.t_spec(), std::string("artifact-bytes"));
      store.push(fx.hprime_spec());
    }
    BuildCache reopened{dir};
    testing::SpliceFixture fx = testing::splice_fixture();
    CHECK(reopened.size() == 6);  // t,h,z10 + hprime,s,z11
    REQUIRE(reopened.lookup(fx.t));
    CHECK(reopened.lookup(fx.t)->artifact == "artifact-bytes");
    CHECK(reopened.lookup(fx.t)->source == EntrySource::built);
    CHECK(to_canonical_json(reopened.lookup(fx.hprime)->spec) ==
          to_canonical_json(fx.hprime_spec()));
    fs::remove_all(dir);
  }

  TEST_CASE("solver facts flatten one entry per node") {
    testing::SpliceFixture fx = testing::splice_fixture();
    auto rows = fx.cache.solver_facts();

    auto rows_for = [&](const Hash& h, const std::string& attr) {
      std::vector<FactRow> out;
      for (const auto& r : rows) {
        if (r.hash == h && r.attr == attr) out.push_back(r);
      }
      return out;
    };

    // The t entry has three link-run deps... two direct children (h, z).
    auto dep_rows = rows_for(fx.t, "depends_on");
    REQUIRE(dep_rows.size() == 2);
    CHECK(dep_rows[0].args == std::vector<std::string>{"t", "h", "link-run"});
    CHECK(dep_rows[1].args == std::vector<std::string>{"t", "z", "link-run"});

    auto hash_rows = rows_for(fx.t, "hash");
    REQUIRE(hash_rows.size() == 2);
    CHECK(hash_rows[0].args == std::vector<std::string>{"h", fx.h.digest});
    CHECK(hash_rows[1].args == std::vector<std::string>{"z", fx.z10.digest});

    CHECK(rows_for(fx.t, "version").size() == 1);
    CHECK(rows_for(fx.t, "version")[0].args == std::vector<std::string>{"t", "1"});
    CHECK(rows_for(fx.t, "node_os")[0].args == std::vector<std::string>{"t", "linux"});
    CHECK(rows_for(fx.t, "node_target")[0].args == std::vector<std::string>{"t", "x86_64"});

    // Leaf entry: no dependency rows at all.
    CHECK(rows_for(fx.z10, "depends_on").empty());
    CHECK(rows_for(fx.z10, "hash").empty());

    BuildCache empty;
    CHECK(empty.solver_facts().empty());
  }

  TEST_CASE("an entry with three link-run deps has exactly three hash rows") {
    SpecBuilder b;
    auto e = b.add("example", "1.1.0");
    auto z = b.add("zlib", "1.3.1");
    auto bz = b.add("bzip2", "1.0.8");
    auto m = b.add("mpich", "3.4.3");
    b.link(e, z);
    b.link(e, bz);
    b.link(e, m);
    b.set_root(e);
    ConcreteSpec spec = b.finish();
    BuildCache cache;
    cache.push(spec);

    auto rows = cache.solver_facts();
    std::size_t hash_rows = 0, variant_rows = 0;
    for (const auto& r : rows) {
      if (r.hash == spec.root && r.attr == "hash") hash_rows += 1;
      if (r.hash == spec.root && r.attr == "variant") variant_rows += 1;
    }
    CHECK(hash_rows == 3);
    CHECK(variant_rows == 0);  // builder nodes carry no variants
  }

  TEST_CASE("facts are lossless for link-run structure") {
    testing::SpliceFixture fx = testing::splice_fixture();
    auto rows = fx.cache.solver_facts();

    // Rebuild the t closure's shape from rows alone.
    std::map<Hash, std::map<std::string, Hash>> children;
    std::map<Hash, std::string> names;
    for (const auto& r : rows) {
      if (r.attr == "version") names[r.hash] = r.args[0];
      if (r.attr == "hash") children[r.hash].emplace(r.args[0], Hash(r.args[1]));
    }
    REQUIRE(names.count(fx.t));
    CHECK(names[fx.t] == "t");
    CHECK(children[fx.t].at("h") == fx.h);
    CHECK(children[fx.t].at("z") == fx.z10);
    CHECK(children[fx.h].at("z") == fx.z10);
    CHECK(children[fx.hprime].at("s") == fx.s);
    CHECK(children[fx.hprime].at("z") == fx.z11);
  }
}

TEST_CASE("facts carry variant rows for configured entries") {
  Repo repo = splicekit::testing::example_repo();
  BuildCache cache;
  // A single-node example@1.1.0+bzip entry (variants fully assigned).
  ConcreteSpec spec;
  ConcreteNode n;
  n.name = "example";
  n.version = Version::parse("1.1.0");
  n.variants.emplace("bzip", VariantValue(true));
  n.os = "centos8";
  n.target = "skylake";
  n.hash = digest_bytes("seed");
  spec.nodes.emplace(n.hash, n);
  spec.root = n.hash;
  rehash(spec);
  cache.push(spec);

  auto rows = cache.solver_facts();
  bool version_row = false, variant_row = false, os_row = false, target_row = false;
  for (const auto& r : rows) {
    if (r.hash != spec.root) continue;
    if (r.attr == "version" && r.args == std::vector<std::string>{"example", "1.1.0"}) version_row = true;
    if (r.attr == "variant" && r.args == std::vector<std::string>{"example", "bzip", "true"}) variant_row = true;
    if (r.attr == "node_os" && r.args == std::vector<std::string>{"example", "centos8"}) os_row = true;
    if (r.attr == "node_target" && r.args == std::vector<std::string>{"example", "skylake"}) target_row = true;
  }
  CHECK(version_row);
  CHECK(variant_row);
  CHECK(os_row);
  CHECK(target_row);
}
