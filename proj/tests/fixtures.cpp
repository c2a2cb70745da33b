#include "fixtures.hpp"

#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"

namespace splicekit::testing {

Repo example_repo() {
  std::vector<PackageDef> defs;

  PackageDef example;
  example.name = "example";
  example.versions = {Version::parse("1.1.0"), Version::parse("1.0.0")};
  example.variants.push_back({"bzip", VariantValue(true), {}});
  {
    DependsOn d;
    d.target = parse_node_constraints("bzip2");
    d.when = parse_node_constraints("+bzip");
    example.depends_on.push_back(d);
    d.target = parse_node_constraints("zlib@1.2");
    d.when = parse_node_constraints("@1.0.0");
    example.depends_on.push_back(d);
    d.target = parse_node_constraints("zlib@1.3");
    d.when = parse_node_constraints("@1.1.0");
    example.depends_on.push_back(d);
    d.target = parse_node_constraints("mpi");
    d.when.reset();
    example.depends_on.push_back(d);
  }
  {
    CanSplice cs;
    cs.target = parse_node_constraints("example@1.0.0");
    cs.when = parse_node_constraints("@1.1.0");
    example.can_splice.push_back(cs);
    cs.target = parse_node_constraints("example-ng@2.3.2+compat");
    cs.when = parse_node_constraints("@1.1.0+bzip");
    example.can_splice.push_back(cs);
  }
  defs.push_back(std::move(example));

  PackageDef example_ng;
  example_ng.name = "example-ng";
  example_ng.versions = {Version::parse("2.3.2")};
  example_ng.variants.push_back({"compat", VariantValue(true), {}});
  defs.push_back(std::move(example_ng));

  PackageDef bzip2;
  bzip2.name = "bzip2";
  bzip2.versions = {Version::parse("1.0.8")};
  bzip2.variants.push_back({"debug", VariantValue(false), {}});
  bzip2.variants.push_back({"pic", VariantValue(true), {}});
  bzip2.variants.push_back({"shared", VariantValue(true), {}});
  defs.push_back(std::move(bzip2));

  PackageDef zlib;
  zlib.name = "zlib";
  zlib.versions = {Version::parse("1.3.1"), Version::parse("1.2.11")};
  zlib.variants.push_back({"optimize", VariantValue(true), {}});
  zlib.variants.push_back({"pic", VariantValue(true), {}});
  zlib.variants.push_back({"shared", VariantValue(true), {}});
  defs.push_back(std::move(zlib));

  PackageDef mpich;
  mpich.name = "mpich";
  mpich.versions = {Version::parse("3.4.3"), Version::parse("3.1")};
  mpich.variants.push_back({"pmi", VariantValue("pmix"), {"pmix", "slurm"}});
  mpich.provides.push_back({"mpi", std::nullopt});
  defs.push_back(std::move(mpich));

  return make_repo(std::move(defs));
}

Hash SpecBuilder::add(const std::string& name, const std::string& version,
                      const std::string& build_spec_key) {
  ConcreteNode n;
  n.name = name;
  n.version = Version::parse(version);
  n.os = "linux";
  n.target = "x86_64";
  n.hash = digest_bytes("builder:" + name + "@" + version + ":" + build_spec_key);
  Hash key = n.hash;
  bool first = spec_.nodes.empty();
  spec_.nodes.emplace(key, std::move(n));
  if (first) spec_.root = key;
  return key;
}

void SpecBuilder::link(const Hash& parent, const Hash& child) {
  spec_.link_run_edges.emplace(parent, child);
}

void SpecBuilder::build_edge(const Hash& parent, const Hash& child) {
  spec_.build_edges.emplace(parent, child);
}

void SpecBuilder::set_root(const Hash& key) { spec_.root = key; }

void SpecBuilder::set_build_spec(const Hash& key, const Hash& real_hash) {
  spec_.nodes.at(key).build_spec_hash = real_hash;
}

ConcreteSpec SpecBuilder::finish(std::map<Hash, Hash>* resolved) {
  ConcreteSpec out = spec_;
  auto remap = rehash(out);
  validate(out);
  if (resolved) *resolved = remap;
  return out;
}

SpliceFixture splice_fixture() {
  std::vector<PackageDef> defs;

  auto leaf = [](const std::string& name, std::vector<std::string> versions) {
    PackageDef def;
    def.name = name;
    for (const auto& v : versions) def.versions.push_back(Version::parse(v));
    return def;
  };

  PackageDef t = leaf("t", {"1"});
  {
    DependsOn d;
    d.target = parse_node_constraints("h");
    t.depends_on.push_back(d);
    d.target = parse_node_constraints("z");
    t.depends_on.push_back(d);
  }
  defs.push_back(std::move(t));

  PackageDef h = leaf("h", {"1"});
  {
    DependsOn d;
    d.target = parse_node_constraints("z");
    h.depends_on.push_back(d);
  }
  defs.push_back(std::move(h));

  PackageDef hprime = leaf("hprime", {"1"});
  {
    DependsOn d;
    d.target = parse_node_constraints("s");
    hprime.depends_on.push_back(d);
    d.target = parse_node_constraints("z");
    hprime.depends_on.push_back(d);
    CanSplice cs;
    cs.target = parse_node_constraints("h@1");
    hprime.can_splice.push_back(cs);
  }
  defs.push_back(std::move(hprime));

  defs.push_back(leaf("s", {"1"}));

  PackageDef z = leaf("z", {"1.1", "1.0"});
  {
    CanSplice cs;
    cs.target = parse_node_constraints("z@1.0");
    cs.when = parse_node_constraints("@1.1");
    z.can_splice.push_back(cs);
    cs.target = parse_node_constraints("z@1.1");
    cs.when = parse_node_constraints("@1.0");
    z.can_splice.push_back(cs);
  }
  defs.push_back(std::move(z));

  SpliceFixture fx;
  fx.repo = make_repo(std::move(defs));

  {
    SpecBuilder b;
    Hash tn = b.add("t", "1");
    Hash hn = b.add("h", "1");
    Hash zn = b.add("z", "1.0");
    b.link(tn, hn);
    b.link(tn, zn);
    b.link(hn, zn);
    b.set_root(tn);
    std::map<Hash, Hash> ids;
    ConcreteSpec spec = b.finish(&ids);
    fx.t = ids.at(tn);
    fx.h = ids.at(hn);
    fx.z10 = ids.at(zn);
    fx.cache.push(spec);
  }
  {
    SpecBuilder b;
    Hash hp = b.add("hprime", "1");
    Hash sn = b.add("s", "1");
    Hash zn = b.add("z", "1.1");
    b.link(hp, sn);
    b.link(hp, zn);
    b.set_root(hp);
    std::map<Hash, Hash> ids;
    ConcreteSpec spec = b.finish(&ids);
    fx.hprime = ids.at(hp);
    fx.s = ids.at(sn);
    fx.z11 = ids.at(zn);
    fx.cache.push(spec);
  }
  // The z closures are entries of their own already; explicit pushes are
  // idempotent and mirror the four-root setup.
  fx.cache.push(fx.cache.lookup(fx.z10)->spec);
  fx.cache.push(fx.cache.lookup(fx.z11)->spec);
  return fx;
}

ConcreteSpec expected_blue(const SpliceFixture& fx) {
  SpecBuilder b;
  Hash tn = b.add("t", "1", "blue");
  Hash hp = b.add("hprime", "1");
  Hash sn = b.add("s", "1");
  Hash zn = b.add("z", "1.1");
  b.link(tn, hp);
  b.link(tn, zn);
  b.link(hp, sn);
  b.link(hp, zn);
  b.set_root(tn);
  b.set_build_spec(tn, fx.t);
  return b.finish();
}

ConcreteSpec expected_red(const SpliceFixture& fx) {
  ConcreteSpec blue = expected_blue(fx);

  SpecBuilder b;
  Hash tn = b.add("t", "1", "red");
  Hash hp = b.add("hprime", "1", "red");
  Hash sn = b.add("s", "1");
  Hash zn = b.add("z", "1.0");
  b.link(tn, hp);
  b.link(tn, zn);
  b.link(hp, sn);
  b.link(hp, zn);
  b.set_root(tn);
  b.set_build_spec(tn, blue.root);
  b.set_build_spec(hp, fx.hprime);
  return b.finish();
}

}  // namespace splicekit::testing
