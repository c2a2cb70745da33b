#ifndef SPLICEKIT_TESTS_FIXTURES_HPP_
#define SPLICEKIT_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "splicekit/buildcache.hpp"
#include "splicekit/repo.hpp"
#include "splicekit/spec.hpp"

namespace splicekit::testing {

// Conditional-package repo: example (two versions, bzip variant, version-gated
// zlib constraints, virtual mpi dependency, two can_splice declarations),
// example-ng, bzip2, zlib, mpich.
Repo example_repo();

// Hand construction of concrete specs for expected-DAG tests.
class SpecBuilder {
 public:
  // Returns a provisional node key; edges use these keys until finish().
  Hash add(const std::string& name, const std::string& version,
           const std::string& build_spec_key = "");
  void link(const Hash& parent, const Hash& child);
  void build_edge(const Hash& parent, const Hash& child);
  void set_root(const Hash& key);

  // Resolves real hashes bottom-up and validates. `resolved` maps the
  // provisional keys passed around before finish.
  ConcreteSpec finish(std::map<Hash, Hash>* resolved = nullptr);

  // Patches a provisional node's build_spec to a real (already final) hash.
  void set_build_spec(const Hash& key, const Hash& real_hash);

 private:
  ConcreteSpec spec_;
};

// Two pre-built stacks t ^h ^z@1.0 and hprime ^s ^z@1.1, ABI compatibility
// declared in both directions between z versions and from hprime onto h.
struct SpliceFixture {
  Repo repo;
  BuildCache cache;
  Hash t;       // root of the t closure
  Hash h;       // h node inside it
  Hash z10;     // z@1.0 node
  Hash hprime;  // root of the hprime closure
  Hash s;
  Hash z11;

  const ConcreteSpec& t_spec() const { return cache.lookup(t)->spec; }
  const ConcreteSpec& hprime_spec() const { return cache.lookup(hprime)->spec; }
};

SpliceFixture splice_fixture();

// Expected DAG after transitively splicing hprime into the t closure.
ConcreteSpec expected_blue(const SpliceFixture& fx);
// Expected DAG after then intransitively splicing z@1.0 back in.
ConcreteSpec expected_red(const SpliceFixture& fx);

}  // namespace splicekit::testing

#endif
