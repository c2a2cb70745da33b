#include "splicekit/repo.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "splicekit/errors.hpp"
#include "splicekit/parser.hpp"

namespace splicekit {

using nlohmann::json;

const VariantDef* PackageDef::find_variant(const std::string& vname) const {
  for (const auto& v : variants) {
    if (v.name == vname) return &v;
  }
  return nullptr;
}

std::optional<std::size_t> PackageDef::version_index(const Version& v) const {
  for (std::size_t i = 0; i < versions.size(); ++i) {
    if (versions[i] == v) return i;
  }
  return std::nullopt;
}

const PackageDef* Repo::find(const std::string& name) const {
  auto it = packages.find(name);
  return it == packages.end() ? nullptr : &it->second;
}

PartialNode PartialNode::of(const ConcreteNode& n) {
  PartialNode p;
  p.version = n.version;
  p.variants = n.variants;
  p.os = n.os;
  p.target = n.target;
  return p;
}

DirectiveStatus when_status(const std::optional<NodeConstraints>& when, const PartialNode& a) {
  if (!when) return DirectiveStatus::active;
  bool undetermined = false;

  if (when->version) {
    if (!a.version) {
      undetermined = true;
    } else if (!when->version->accepts(*a.version)) {
      return DirectiveStatus::inactive;
    }
  }
  for (const auto& [vname, want] : when->variants) {
    auto it = a.variants.find(vname);
    if (it == a.variants.end()) {
      undetermined = true;
    } else if (!(it->second == want)) {
      return DirectiveStatus::inactive;
    }
  }
  if (when->os) {
    if (!a.os) {
      undetermined = true;
    } else if (*a.os != *when->os) {
      return DirectiveStatus::inactive;
    }
  }
  if (when->target) {
    if (!a.target) {
      undetermined = true;
    } else if (*a.target != *when->target) {
      return DirectiveStatus::inactive;
    }
  }
  return undetermined ? DirectiveStatus::undetermined : DirectiveStatus::active;
}

ActiveDirectives active_directives(const PackageDef& def, const PartialNode& assignment) {
  ActiveDirectives out;
  auto consider = [&](const std::optional<NodeConstraints>& when, auto* directive, auto& bucket) {
    switch (when_status(when, assignment)) {
      case DirectiveStatus::active:
        bucket.push_back(directive);
        break;
      case DirectiveStatus::undetermined:
        out.any_undetermined = true;
        break;
      case DirectiveStatus::inactive:
        break;
    }
  };
  for (const auto& d : def.depends_on) consider(d.when, &d, out.depends_on);
  for (const auto& p : def.provides) consider(p.when, &p, out.provides);
  for (const auto& c : def.can_splice) consider(c.when, &c, out.can_splice);
  return out;
}

namespace {

void validate_when(const PackageDef& def, const std::optional<NodeConstraints>& when,
                   const std::string& where) {
  if (!when) return;
  if (!when->name.empty() && when->name != def.name) {
    throw RepoValidationError("package '" + def.name + "': " + where + " when-clause names '" +
                              when->name + "'");
  }
  for (const auto& [vname, value] : when->variants) {
    if (!def.find_variant(vname)) {
      throw RepoValidationError("package '" + def.name + "': " + where +
                                " when-clause references undeclared variant '" + vname + "'");
    }
  }
}

void validate_def(const PackageDef& def) {
  if (def.name.empty()) throw RepoValidationError("package with empty name");
  if (def.versions.empty()) {
    throw RepoValidationError("package '" + def.name + "' declares no versions");
  }
  for (std::size_t i = 1; i < def.versions.size(); ++i) {
    if (!(def.versions[i] < def.versions[i - 1])) {
      throw RepoValidationError("package '" + def.name + "': versions must be unique, newest first");
    }
  }
  std::set<std::string> vnames;
  for (const auto& v : def.variants) {
    if (!vnames.insert(v.name).second) {
      throw RepoValidationError("package '" + def.name + "': duplicate variant '" + v.name + "'");
    }
    if (!v.allowed.empty()) {
      if (v.default_value.is_bool()) {
        throw RepoValidationError("package '" + def.name + "': variant '" + v.name +
                                  "' lists values but defaults to a boolean");
      }
      if (std::find(v.allowed.begin(), v.allowed.end(), v.default_value.as_string()) ==
          v.allowed.end()) {
        throw RepoValidationError("package '" + def.name + "': default for variant '" + v.name +
                                  "' not among its values");
      }
    }
  }
  for (const auto& d : def.depends_on) {
    if (d.target.name.empty()) {
      throw RepoValidationError("package '" + def.name + "': depends_on without a target name");
    }
    validate_when(def, d.when, "depends_on(" + d.target.name + ")");
  }
  for (const auto& p : def.provides) {
    if (p.virtual_name.empty()) {
      throw RepoValidationError("package '" + def.name + "': provides with empty virtual name");
    }
    validate_when(def, p.when, "provides(" + p.virtual_name + ")");
  }
  for (const auto& c : def.can_splice) {
    if (c.target.name.empty()) {
      throw RepoValidationError("package '" + def.name + "': can_splice without a target name");
    }
    validate_when(def, c.when, "can_splice(" + c.target.name + ")");
  }
}

}  // namespace

Repo make_repo(std::vector<PackageDef> defs) {
  Repo repo;
  for (auto& def : defs) {
    validate_def(def);
    std::string name = def.name;
    if (!repo.packages.emplace(name, std::move(def)).second) {
      throw RepoValidationError("duplicate package definition '" + name + "'");
    }
  }
  for (const auto& [name, def] : repo.packages) {
    for (const auto& p : def.provides) repo.providers[p.virtual_name].push_back(name);
  }
  for (auto& [vname, names] : repo.providers) std::sort(names.begin(), names.end());

  for (const auto& [name, def] : repo.packages) {
    for (const auto& d : def.depends_on) {
      if (!repo.packages.count(d.target.name) && !repo.providers.count(d.target.name)) {
        repo.warnings.push_back("package '" + name + "' depends on '" + d.target.name +
                                "', which is neither a package nor a provided virtual");
      }
    }
  }
  return repo;
}

namespace {

std::optional<NodeConstraints> parse_when_field(const json& doc, const std::string& pkg) {
  if (!doc.contains("when")) return std::nullopt;
  try {
    return parse_node_constraints(doc.at("when").get<std::string>());
  } catch (const ParseError& e) {
    throw RepoFormatError("package '" + pkg + "': bad when-clause: " + e.what());
  }
}

}  // namespace

PackageDef package_def_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw RepoFormatError(std::string("malformed package document: ") + e.what());
  }

  PackageDef def;
  try {
    def.name = doc.at("name").get<std::string>();
    for (const auto& v : doc.at("versions")) {
      def.versions.push_back(Version::parse(v.get<std::string>()));
    }
    for (const auto& v : doc.value("variants", json::array())) {
      VariantDef vd;
      vd.name = v.at("name").get<std::string>();
      const auto& dflt = v.at("default");
      if (dflt.is_boolean()) {
        vd.default_value = VariantValue(dflt.get<bool>());
      } else {
        vd.default_value = VariantValue(dflt.get<std::string>());
      }
      for (const auto& allowed : v.value("values", json::array())) {
        vd.allowed.push_back(allowed.get<std::string>());
      }
      def.variants.push_back(std::move(vd));
    }
    for (const auto& d : doc.value("depends_on", json::array())) {
      DependsOn dep;
      dep.target = parse_node_constraints(d.at("spec").get<std::string>());
      dep.when = parse_when_field(d, def.name);
      dep.kind = edge_kind_from_name(d.value("kind", std::string("link-run")));
      if (dep.kind == EdgeKind::any) {
        throw RepoFormatError("package '" + def.name + "': depends_on kind must be link-run or build");
      }
      def.depends_on.push_back(std::move(dep));
    }
    for (const auto& p : doc.value("provides", json::array())) {
      Provides prov;
      prov.virtual_name = p.at("virtual").get<std::string>();
      prov.when = parse_when_field(p, def.name);
      def.provides.push_back(std::move(prov));
    }
    for (const auto& c : doc.value("can_splice", json::array())) {
      CanSplice cs;
      cs.target = parse_node_constraints(c.at("target").get<std::string>());
      cs.when = parse_when_field(c, def.name);
      def.can_splice.push_back(std::move(cs));
    }
  } catch (const json::exception& e) {
    throw RepoFormatError("malformed package document: " + std::string(e.what()));
  } catch (const ParseError& e) {
    throw RepoFormatError("package '" + def.name + "': " + e.what());
  }
  return def;
}

std::string package_def_to_json(const PackageDef& def) {
  json doc;
  doc["name"] = def.name;
  json versions = json::array();
  for (const auto& v : def.versions) versions.push_back(v.str());
  doc["versions"] = std::move(versions);

  if (!def.variants.empty()) {
    json variants = json::array();
    for (const auto& v : def.variants) {
      json vd;
      vd["name"] = v.name;
      if (v.default_value.is_bool()) {
        vd["default"] = v.default_value.as_bool();
      } else {
        vd["default"] = v.default_value.as_string();
      }
      if (!v.allowed.empty()) vd["values"] = v.allowed;
      variants.push_back(std::move(vd));
    }
    doc["variants"] = std::move(variants);
  }
  auto when_field = [](const std::optional<NodeConstraints>& when, json& target) {
    if (when) target["when"] = format_constraints(*when);
  };
  if (!def.depends_on.empty()) {
    json deps = json::array();
    for (const auto& d : def.depends_on) {
      json dd;
      dd["spec"] = format_constraints(d.target);
      if (d.kind != EdgeKind::link_run) dd["kind"] = edge_kind_name(d.kind);
      when_field(d.when, dd);
      deps.push_back(std::move(dd));
    }
    doc["depends_on"] = std::move(deps);
  }
  if (!def.provides.empty()) {
    json provides = json::array();
    for (const auto& p : def.provides) {
      json pd;
      pd["virtual"] = p.virtual_name;
      when_field(p.when, pd);
      provides.push_back(std::move(pd));
    }
    doc["provides"] = std::move(provides);
  }
  if (!def.can_splice.empty()) {
    json splices = json::array();
    for (const auto& c : def.can_splice) {
      json cd;
      cd["target"] = format_constraints(c.target);
      when_field(c.when, cd);
      splices.push_back(std::move(cd));
    }
    doc["can_splice"] = std::move(splices);
  }
  return doc.dump(2);
}

Repo load_repo(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  fs::path pkg_dir = path / "packages";
  std::vector<PackageDef> defs;
  if (fs::exists(pkg_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(pkg_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot read " + file.string());
      std::stringstream buffer;
      buffer << in.rdbuf();
      PackageDef def = package_def_from_json(buffer.str());
      if (file.stem().string() != def.name) {
        throw RepoFormatError("package file " + file.string() + " declares name '" + def.name + "'");
      }
      defs.push_back(std::move(def));
    }
  } else if (!fs::exists(path)) {
    throw IoError("repository path does not exist: " + path.string());
  }
  return make_repo(std::move(defs));
}

void write_repo(const Repo& repo, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  fs::create_directories(path / "packages");
  for (const auto& [name, def] : repo.packages) {
    std::ofstream out(path / "packages" / (name + ".json"));
    if (!out) throw IoError("cannot write package file for '" + name + "'");
    out << package_def_to_json(def) << "\n";
  }
}

}  // namespace splicekit
