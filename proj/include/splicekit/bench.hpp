#ifndef SPLICEKIT_BENCH_HPP_
#define SPLICEKIT_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "splicekit/buildcache.hpp"
#include "splicekit/repo.hpp"

namespace splicekit {

/// Generator knobs for the layered MPI stack: K app packages with a virtual
/// mpi dependency, one mpich provider, R mpiabi replicas that can splice into
/// mpich@3.4.3, and a cache pre-populated with every app built against mpich.
struct MpiStackParams {
  std::size_t app_count = 8;        // K
  std::size_t replica_count = 1;    // R
  std::size_t non_mpi_apps = 0;     // trailing apps without the mpi dependency
  std::size_t variant_count = 1;    // boolean variants per app
  double dep_density = 0.0;         // chance that app_i depends on an earlier app
  std::uint64_t seed = 0;
  std::size_t inflated_cache_entries = 0;  // irrelevant padding packages + entries
};

struct MpiStack {
  Repo repo;
  BuildCache cache;  // in-memory
};

MpiStack generate_mpi_stack(const MpiStackParams& params);

struct BenchScenario {
  std::string id = "mpi-stack";
  MpiStackParams stack;
  std::vector<std::string> requests;  // empty: every app, plus a constrained splice request per MPI app
  std::size_t repetitions = 10;
  bool forbid_mpich = false;  // solutions must not link against mpich

  static BenchScenario from_json(const std::string& text);
  std::string to_json() const;
};

struct BenchRow {
  std::string scenario_id;
  std::string request;
  bool splice = false;
  std::size_t replicas = 0;
  std::size_t repetition = 0;
  std::string status;  // ok | unsat | error
  double wall_ms = 0.0;
  std::string objective;  // "builds:version_penalty:deviation:splices"
  std::uint64_t splice_count = 0;
  std::uint64_t builds = 0;
};

/// Runs every request with splicing off and on, `repetitions` times each.
/// Row order is deterministic; only the timing column varies across runs.
std::vector<BenchRow> run_scenario(const BenchScenario& scenario);

std::string csv_header();
std::string to_csv(const std::vector<BenchRow>& rows);

}  // namespace splicekit

#endif
