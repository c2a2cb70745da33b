#ifndef SPLICEKIT_INSTALLER_HPP_
#define SPLICEKIT_INSTALLER_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splicekit/buildcache.hpp"
#include "splicekit/spec.hpp"
#include "splicekit/splicer.hpp"

namespace splicekit {

// Fixed-width field widths of the mock artifact format. Relocation and
// rewiring rewrite fields in place, so artifact length is a function of the
// dependency count only. Byte-exact layout in docs/artifact-format.md.
inline constexpr std::size_t kPrefixFieldWidth = 256;
inline constexpr std::size_t kNameFieldWidth = 64;
inline constexpr std::size_t kVersionFieldWidth = 32;
inline constexpr char kArtifactMagic[] = "SPLC1";

/// Parsed form of a mock binary: header naming the package, the prefix it is
/// installed at, and one (name, hash, prefix) field per direct link-run
/// dependency, dependents-before-dependencies.
struct MockBinary {
  struct DepField {
    std::string name;
    Hash hash;
    std::string prefix;
  };

  std::string name;
  std::string version;
  std::string self_prefix;
  std::vector<DepField> deps;

  std::string bytes() const;  // throws PrefixTooLongError
  static MockBinary parse(const std::string& bytes);

  static std::size_t artifact_size(std::size_t dep_count);
};

/// A prefix tree: every installed spec lives at <root>/<name>-<version>-<hash8>.
class InstallTree {
 public:
  explicit InstallTree(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path prefix_for(const ConcreteNode& n) const;

  bool installed(const Hash& h) const { return installed_.count(h) > 0; }
  std::optional<std::filesystem::path> prefix_of(const Hash& h) const;
  const std::map<Hash, std::filesystem::path>& installed_map() const { return installed_; }

  void register_install(const Hash& h, const std::filesystem::path& prefix);

 private:
  void load_manifest();
  void save_manifest() const;

  std::filesystem::path root_;
  std::map<Hash, std::filesystem::path> installed_;
};

// Artifact bytes for a freshly built spec; all link-run deps must already be
// installed in the tree. Throws MissingDependencyError.
std::string build_mock(const ConcreteSpec& spec, const InstallTree& tree);

// Installs the entry's closure bottom-up, relocating every artifact's
// embedded prefixes to this tree. Idempotent per node. Returns the root prefix.
std::filesystem::path install(const CacheEntry& entry, InstallTree& tree, const BuildCache& cache);

// Installs the spliced nodes of `spliced` by patching their original build
// artifacts per rewiring_map; no compilation happens. Non-spliced closure
// nodes must already be installed. `extra_specs` resolves provenance-chain
// specs that are not cache entries. Returns the root prefix.
std::filesystem::path rewire(const ConcreteSpec& spliced, InstallTree& tree, const BuildCache& cache,
                             const std::map<Hash, ConcreteSpec>& extra_specs = {});

struct VerificationFailure {
  Hash node;
  std::string message;
};

struct VerificationReport {
  std::vector<VerificationFailure> failures;
  std::size_t nodes_checked = 0;

  bool ok() const { return failures.empty(); }
  std::string to_json() const;
};

// Parses the artifact at `prefix` and checks its header and dependency fields
// against the expected spec and the tree's installed map, recursively over the
// link-run closure. Failures are report entries, never exceptions.
VerificationReport verify_install(const std::filesystem::path& prefix, const InstallTree& tree,
                                  const ConcreteSpec& expected);

}  // namespace splicekit

#endif
