#include <doctest.h>

#include <sstream>

#include "splicekit/bench.hpp"
#include "splicekit/concretizer.hpp"
#include "splicekit/parser.hpp"

using namespace splicekit;

namespace {

std::string strip_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    // wall_ms is column 7; blank it.
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cols.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols.size() > 6) cols[6] = "-";
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_SUITE("bench-harness") {
  TEST_CASE("stack shape: K apps, one mpich, R replicas") {
    MpiStackParams params;
    params.app_count = 3;
    params.replica_count = 1;
    MpiStack stack = generate_mpi_stack(params);
    CHECK(stack.repo.packages.size() == 5);  // 3 apps + mpich + 1 replica
    CHECK(stack.repo.packages.count("mpich") == 1);
    CHECK(stack.repo.packages.count("mpiabi-000") == 1);
    CHECK(stack.repo.providers.at("mpi").size() == 2);

    // Cache holds every app built against mpich plus the replica and mpich.
    CHECK(stack.cache.by_name("app-000").size() == 1);
    CHECK(stack.cache.by_name("mpich").size() == 1);
    CHECK(stack.cache.by_name("mpiabi-000").size() == 1);

    const CacheEntry* app = stack.cache.lookup(stack.cache.by_name("app-000")[0]);
    bool against_mpich = false;
    for (const auto& [h, n] : app->spec.nodes) against_mpich |= n.name == "mpich";
    CHECK(against_mpich);
  }

  TEST_CASE("replica count drives the splice candidate list") {
    MpiStackParams params;
    params.app_count = 1;
    params.replica_count = 100;
    MpiStack stack = generate_mpi_stack(params);
    const CacheEntry* mpich = stack.cache.lookup(stack.cache.by_name("mpich")[0]);
    auto candidates = splice_candidates(mpich->spec.root_node(), stack.repo, stack.cache);
    CHECK(candidates.size() == 100);

    params.replica_count = 0;
    MpiStack none = generate_mpi_stack(params);
    const CacheEntry* mpich2 = none.cache.lookup(none.cache.by_name("mpich")[0]);
    CHECK(splice_candidates(mpich2->spec.root_node(), none.repo, none.cache).empty());
  }

  TEST_CASE("constrained app request splices instead of rebuilding") {
    MpiStackParams params;
    params.app_count = 2;
    params.replica_count = 2;
    MpiStack stack = generate_mpi_stack(params);

    SolveOptions with_splice;
    with_splice.splice_enabled = true;
    SolveResult spliced =
        concretize(parse_spec("app-000 ^mpiabi-000"), stack.repo, stack.cache, with_splice);
    CHECK(spliced.objective.builds == 0);
    REQUIRE(spliced.splices.size() == 1);
    const ConcreteNode& replaced = stack.cache.lookup(spliced.splices[0].replaced_hash)->spec.root_node();
    CHECK(replaced.name == "mpich");
    CHECK(replaced.version.str() == "3.4.3");

    SolveOptions without;
    without.splice_enabled = false;
    SolveResult rebuilt =
        concretize(parse_spec("app-000 ^mpiabi-000"), stack.repo, stack.cache, without);
    CHECK(rebuilt.objective.builds >= 1);
  }

  TEST_CASE("non-mpi apps never splice") {
    MpiStackParams params;
    params.app_count = 2;
    params.replica_count = 3;
    params.non_mpi_apps = 1;
    MpiStack stack = generate_mpi_stack(params);

    SolveOptions opts;
    opts.splice_enabled = true;
    SolveResult result = concretize(parse_spec("app-001"), stack.repo, stack.cache, opts);
    CHECK(result.objective.builds == 0);
    CHECK(result.splices.empty());
    for (const auto& [h, n] : result.spec.nodes) CHECK(n.name != "mpich");
  }

  TEST_CASE("scenario rows are deterministic except for timings") {
    BenchScenario scenario;
    scenario.id = "unit";
    scenario.stack.app_count = 2;
    scenario.stack.replica_count = 1;
    scenario.stack.non_mpi_apps = 1;
    scenario.repetitions = 2;

    auto rows_a = run_scenario(scenario);
    auto rows_b = run_scenario(scenario);
    CHECK(strip_timing(to_csv(rows_a)) == strip_timing(to_csv(rows_b)));
    REQUIRE(!rows_a.empty());
    CHECK(to_csv(rows_a).rfind(csv_header(), 0) == 0);

    // Requests run with splicing both off and on, repetitions times each.
    std::size_t expected_requests = 3;  // app-000, app-000 ^mpiabi-000, app-001
    CHECK(rows_a.size() == expected_requests * 2 * scenario.repetitions);

    for (const auto& row : rows_a) {
      CHECK(row.status == "ok");
      if (row.request.find('^') != std::string::npos && row.splice) {
        CHECK(row.builds == 0);
        CHECK(row.splice_count >= 1);
      }
    }
  }

  TEST_CASE("forbidding mpich forces splices on unconstrained requests") {
    BenchScenario scenario;
    scenario.id = "forbid";
    scenario.stack.app_count = 2;
    scenario.stack.replica_count = 2;
    scenario.repetitions = 1;
    scenario.forbid_mpich = true;
    scenario.requests = {"app-000", "app-001"};

    auto rows = run_scenario(scenario);
    for (const auto& row : rows) {
      if (row.splice) {
        CHECK(row.status == "ok");
        CHECK(row.builds == 0);
        CHECK(row.splice_count >= 1);
      } else {
        // Without splicing the apps must be rebuilt against a replica.
        CHECK(row.status == "ok");
        CHECK(row.builds >= 1);
      }
    }
  }

  TEST_CASE("scenario JSON round trip") {
    BenchScenario scenario;
    scenario.id = "roundtrip";
    scenario.stack.app_count = 4;
    scenario.stack.replica_count = 9;
    scenario.requests = {"app-000"};
    BenchScenario back = BenchScenario::from_json(scenario.to_json());
    CHECK(back.id == scenario.id);
    CHECK(back.stack.app_count == 4);
    CHECK(back.stack.replica_count == 9);
    CHECK(back.requests == scenario.requests);
  }
}
