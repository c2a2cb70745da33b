#ifndef SPLICEKIT_REPO_HPP_
#define SPLICEKIT_REPO_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splicekit/spec.hpp"

namespace splicekit {

struct VariantDef {
  std::string name;
  VariantValue default_value;
  // Allowed string values; empty means boolean (or unconstrained string).
  std::vector<std::string> allowed;
};

struct DependsOn {
  NodeConstraints target;  // package or virtual name plus constraints
  std::optional<NodeConstraints> when;
  EdgeKind kind = EdgeKind::link_run;
};

struct Provides {
  std::string virtual_name;
  std::optional<NodeConstraints> when;
};

struct CanSplice {
  NodeConstraints target;  // constraints on the spec this package can replace
  std::optional<NodeConstraints> when;
};

/// A conditional package description (one document per package).
struct PackageDef {
  std::string name;
  std::vector<Version> versions;  // newest first
  std::vector<VariantDef> variants;
  std::vector<DependsOn> depends_on;
  std::vector<Provides> provides;
  std::vector<CanSplice> can_splice;

  const VariantDef* find_variant(const std::string& vname) const;
  std::optional<std::size_t> version_index(const Version& v) const;
};

struct Repo {
  std::map<std::string, PackageDef> packages;
  // virtual name -> provider package names, sorted. Derived from provides.
  std::map<std::string, std::vector<std::string>> providers;
  std::vector<std::string> warnings;

  const PackageDef* find(const std::string& name) const;
  bool is_virtual(const std::string& name) const { return providers.count(name) > 0; }
};

// Partially assigned node attributes, as known mid-solve.
struct PartialNode {
  std::optional<Version> version;
  std::map<std::string, VariantValue> variants;
  std::optional<std::string> os;
  std::optional<std::string> target;

  static PartialNode of(const ConcreteNode& n);
};

enum class DirectiveStatus { active, inactive, undetermined };

// Status of a when-clause against a partial assignment: inactive if any field
// present in both disagrees, undetermined if a mentioned field is unassigned.
DirectiveStatus when_status(const std::optional<NodeConstraints>& when, const PartialNode& assignment);

struct ActiveDirectives {
  std::vector<const DependsOn*> depends_on;
  std::vector<const Provides*> provides;
  std::vector<const CanSplice*> can_splice;
  bool any_undetermined = false;
};

// Directives of `def` whose when-clause is satisfied by the assignment.
ActiveDirectives active_directives(const PackageDef& def, const PartialNode& assignment);

// --- on-disk repository -----------------------------------------------------

// Loads `<path>/packages/*.json` (schema in docs/package-schema.md).
// Throws RepoFormatError on malformed documents, RepoValidationError on
// inconsistent definitions (e.g. a when-clause naming an undeclared variant).
Repo load_repo(const std::filesystem::path& path);

// Builds a Repo from already-parsed definitions, applying the same validation.
Repo make_repo(std::vector<PackageDef> defs);

PackageDef package_def_from_json(const std::string& json_text);
std::string package_def_to_json(const PackageDef& def);

// Writes `<path>/packages/<name>.json` for every package.
void write_repo(const Repo& repo, const std::filesystem::path& path);

}  // namespace splicekit

#endif
