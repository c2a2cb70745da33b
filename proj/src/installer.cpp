#include "splicekit/installer.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splicekit/errors.hpp"

namespace splicekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMagicLen = 5;
constexpr std::size_t kCountLen = 4;
constexpr std::size_t kHeaderLen = kMagicLen + kNameFieldWidth + kVersionFieldWidth + kCountLen;
constexpr std::size_t kDepFieldLen = kNameFieldWidth + 64 + kPrefixFieldWidth;

void put_padded(std::string& out, const std::string& value, std::size_t width,
                const char* what) {
  if (value.size() > width) {
    if (width == kPrefixFieldWidth) {
      throw PrefixTooLongError(std::string(what) + " '" + value + "' exceeds " +
                               std::to_string(width) + " bytes");
    }
    throw Error(std::string(what) + " '" + value + "' exceeds " + std::to_string(width) + " bytes");
  }
  out += value;
  out.append(width - value.size(), '\0');
}

std::string take_padded(const std::string& bytes, std::size_t offset, std::size_t width) {
  std::string field = bytes.substr(offset, width);
  auto end = field.find('\0');
  if (end != std::string::npos) field.resize(end);
  return field;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + p.string());
}

// Closure in dependencies-first order (link-run and build edges both count).
std::vector<Hash> postorder(const ConcreteSpec& spec, const Hash& from) {
  std::vector<Hash> order;
  std::set<Hash> seen;
  std::function<void(const Hash&)> visit = [&](const Hash& h) {
    if (!seen.insert(h).second) return;
    for (const auto& c : spec.link_run_children(h)) visit(c);
    for (const auto& c : spec.build_children(h)) visit(c);
    order.push_back(h);
  };
  visit(from);
  return order;
}

// Direct link-run children, dependents before dependencies (ties by name:
// deeper subtrees first, leaves last).
std::vector<Hash> topo_ordered_children(const ConcreteSpec& spec, const Hash& parent) {
  std::map<Hash, std::size_t> depth;
  std::function<std::size_t(const Hash&)> measure = [&](const Hash& h) -> std::size_t {
    if (auto it = depth.find(h); it != depth.end()) return it->second;
    std::size_t d = 0;
    for (const auto& c : spec.link_run_children(h)) d = std::max(d, measure(c) + 1);
    depth[h] = d;
    return d;
  };
  auto children = spec.link_run_children(parent);  // already (name, hash) sorted
  std::stable_sort(children.begin(), children.end(),
                   [&](const Hash& a, const Hash& b) { return measure(a) > measure(b); });
  return children;
}

}  // namespace

std::size_t MockBinary::artifact_size(std::size_t dep_count) {
  return kHeaderLen + kPrefixFieldWidth + dep_count * kDepFieldLen;
}

std::string MockBinary::bytes() const {
  std::string out;
  out.reserve(artifact_size(deps.size()));
  out += kArtifactMagic;
  put_padded(out, name, kNameFieldWidth, "package name");
  put_padded(out, version, kVersionFieldWidth, "version");
  std::uint32_t count = static_cast<std::uint32_t>(deps.size());
  for (int i = 0; i < 4; ++i) out += static_cast<char>((count >> (8 * i)) & 0xff);
  put_padded(out, self_prefix, kPrefixFieldWidth, "install prefix");
  for (const auto& dep : deps) {
    put_padded(out, dep.name, kNameFieldWidth, "dependency name");
    out += dep.hash.digest;
    put_padded(out, dep.prefix, kPrefixFieldWidth, "dependency prefix");
  }
  return out;
}

MockBinary MockBinary::parse(const std::string& bytes) {
  if (bytes.size() < kHeaderLen + kPrefixFieldWidth ||
      bytes.compare(0, kMagicLen, kArtifactMagic) != 0) {
    throw Error("not a mock artifact (bad magic or truncated)");
  }
  MockBinary bin;
  std::size_t off = kMagicLen;
  bin.name = take_padded(bytes, off, kNameFieldWidth);
  off += kNameFieldWidth;
  bin.version = take_padded(bytes, off, kVersionFieldWidth);
  off += kVersionFieldWidth;
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) {
    count |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
  }
  off += kCountLen;
  bin.self_prefix = take_padded(bytes, off, kPrefixFieldWidth);
  off += kPrefixFieldWidth;
  if (bytes.size() != artifact_size(count)) {
    throw Error("artifact length " + std::to_string(bytes.size()) + " does not match dep count " +
                std::to_string(count));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    DepField dep;
    dep.name = take_padded(bytes, off, kNameFieldWidth);
    off += kNameFieldWidth;
    dep.hash = Hash(bytes.substr(off, 64));
    off += 64;
    dep.prefix = take_padded(bytes, off, kPrefixFieldWidth);
    off += kPrefixFieldWidth;
    bin.deps.push_back(std::move(dep));
  }
  return bin;
}

InstallTree::InstallTree(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  load_manifest();
}

fs::path InstallTree::prefix_for(const ConcreteNode& n) const {
  return root_ / (n.name + "-" + n.version.str() + "-" + n.hash.hash8());
}

std::optional<fs::path> InstallTree::prefix_of(const Hash& h) const {
  auto it = installed_.find(h);
  if (it == installed_.end()) return std::nullopt;
  return it->second;
}

void InstallTree::register_install(const Hash& h, const fs::path& prefix) {
  installed_[h] = prefix;
  save_manifest();
}

void InstallTree::load_manifest() {
  fs::path manifest = root_ / ".manifest.json";
  if (!fs::exists(manifest)) return;
  json doc;
  try {
    doc = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    throw IoError("malformed tree manifest: " + std::string(e.what()));
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    installed_.emplace(Hash(it.key()), fs::path(it->get<std::string>()));
  }
}

void InstallTree::save_manifest() const {
  json doc = json::object();
  for (const auto& [h, p] : installed_) doc[h.digest] = p.string();
  write_file(root_ / ".manifest.json", doc.dump());
}

std::string build_mock(const ConcreteSpec& spec, const InstallTree& tree) {
  const ConcreteNode& root = spec.root_node();
  MockBinary bin;
  bin.name = root.name;
  bin.version = root.version.str();
  bin.self_prefix = tree.prefix_for(root).string();
  for (const auto& c : topo_ordered_children(spec, spec.root)) {
    auto prefix = tree.prefix_of(c);
    if (!prefix) {
      throw MissingDependencyError("dependency '" + spec.node(c).name + "' (" + c.hash8() +
                                   ") is not installed");
    }
    bin.deps.push_back({spec.node(c).name, c, prefix->string()});
  }
  return bin.bytes();
}

namespace {

fs::path install_node(const ConcreteSpec& spec, const Hash& h, InstallTree& tree,
                      const BuildCache& cache) {
  if (auto existing = tree.prefix_of(h)) return *existing;

  const CacheEntry* entry = cache.lookup(h);
  if (!entry || !entry->artifact) {
    throw MissingDependencyError("no installable cache entry for '" + spec.node(h).name + "' (" +
                                 h.hash8() + ")");
  }
  MockBinary bin = MockBinary::parse(*entry->artifact);
  // Relocation: only the prefix fields change; length is invariant.
  fs::path prefix = tree.prefix_for(spec.node(h));
  bin.self_prefix = prefix.string();
  for (auto& dep : bin.deps) {
    auto dep_prefix = tree.prefix_of(dep.hash);
    if (!dep_prefix) {
      throw MissingDependencyError("dependency " + dep.hash.hash8() + " of '" + bin.name +
                                   "' is not installed");
    }
    dep.prefix = dep_prefix->string();
  }
  fs::create_directories(prefix);
  write_file(prefix / "bin", bin.bytes());
  tree.register_install(h, prefix);
  return prefix;
}

}  // namespace

fs::path install(const CacheEntry& entry, InstallTree& tree, const BuildCache& cache) {
  fs::path root_prefix;
  for (const auto& h : postorder(entry.spec, entry.root_hash)) {
    root_prefix = install_node(entry.spec, h, tree, cache);
  }
  return root_prefix;
}

fs::path rewire(const ConcreteSpec& spliced, InstallTree& tree, const BuildCache& cache,
                const std::map<Hash, ConcreteSpec>& extra_specs) {
  auto store = overlay(extra_specs, lookup_in(cache));
  auto maps = rewiring_map(spliced, store);

  for (const auto& h : postorder(spliced, spliced.root)) {
    const ConcreteNode& n = spliced.node(h);
    if (!n.spliced() || tree.installed(h)) continue;

    // The artifact to patch is the one built for the terminal build spec.
    Hash terminal = *n.build_spec_hash;
    std::set<Hash> seen{h};
    while (true) {
      if (!seen.insert(terminal).second) {
        throw MissingProvenanceError("provenance cycle at " + terminal.hash8());
      }
      auto spec = store(terminal);
      if (!spec) {
        throw MissingProvenanceError("build spec " + terminal.hash8() + " of '" + n.name +
                                     "' is not resolvable");
      }
      if (!spec->root_node().build_spec_hash) break;
      terminal = *spec->root_node().build_spec_hash;
    }
    const CacheEntry* built = cache.lookup(terminal);
    if (!built || !built->artifact) {
      throw MissingProvenanceError("no built artifact for build spec " + terminal.hash8() +
                                   " of '" + n.name + "'");
    }

    MockBinary bin = MockBinary::parse(*built->artifact);
    fs::path prefix = tree.prefix_for(n);
    bin.self_prefix = prefix.string();
    const auto& node_map = maps.at(h);
    for (auto& dep : bin.deps) {
      if (auto it = node_map.find(dep.hash); it != node_map.end()) {
        dep.hash = it->second;
        dep.name = spliced.node(it->second).name;
      }
      auto dep_prefix = tree.prefix_of(dep.hash);
      if (!dep_prefix) {
        throw MissingDependencyError("rewire target dependency " + dep.hash.hash8() +
                                     " is not installed");
      }
      dep.prefix = dep_prefix->string();
    }
    fs::create_directories(prefix);
    write_file(prefix / "bin", bin.bytes());
    tree.register_install(h, prefix);
  }

  auto root_prefix = tree.prefix_of(spliced.root);
  return root_prefix ? *root_prefix : tree.prefix_for(spliced.root_node());
}

VerificationReport verify_install(const fs::path& prefix, const InstallTree& tree,
                                  const ConcreteSpec& expected) {
  VerificationReport report;

  std::set<Hash> visited;
  std::function<void(const fs::path&, const Hash&)> check = [&](const fs::path& at, const Hash& h) {
    if (!visited.insert(h).second) return;
    report.nodes_checked += 1;
    const ConcreteNode& n = expected.node(h);
    auto fail = [&](const std::string& msg) { report.failures.push_back({h, msg}); };

    std::string bytes;
    try {
      bytes = read_file(at / "bin");
    } catch (const IoError& e) {
      fail(e.what());
      return;
    }
    MockBinary bin;
    try {
      bin = MockBinary::parse(bytes);
    } catch (const Error& e) {
      fail(e.what());
      return;
    }
    if (bin.name != n.name) fail("artifact names '" + bin.name + "', expected '" + n.name + "'");
    if (bin.version != n.version.str()) {
      fail("artifact version '" + bin.version + "', expected '" + n.version.str() + "'");
    }
    if (bin.self_prefix != at.string()) {
      fail("artifact self prefix '" + bin.self_prefix + "' differs from location '" + at.string() +
           "'");
    }

    auto children = expected.link_run_children(h);
    if (bin.deps.size() != children.size()) {
      fail("artifact embeds " + std::to_string(bin.deps.size()) + " dependencies, expected " +
           std::to_string(children.size()));
    }
    for (const auto& c : children) {
      const ConcreteNode& cn = expected.node(c);
      const MockBinary::DepField* field = nullptr;
      for (const auto& dep : bin.deps) {
        if (dep.hash == c) {
          field = &dep;
          break;
        }
      }
      if (!field) {
        fail("dependency '" + cn.name + "' (" + c.hash8() + ") missing from artifact");
        continue;
      }
      if (field->name != cn.name) {
        fail("dependency field for " + c.hash8() + " names '" + field->name + "', expected '" +
             cn.name + "'");
      }
      auto dep_prefix = tree.prefix_of(c);
      if (!dep_prefix) {
        fail("dependency '" + cn.name + "' (" + c.hash8() + ") is not installed in the tree");
      } else {
        if (field->prefix != dep_prefix->string()) {
          fail("dependency '" + cn.name + "' prefix '" + field->prefix + "' != installed '" +
               dep_prefix->string() + "'");
        }
        check(*dep_prefix, c);
      }
    }
  };

  check(prefix, expected.root);
  return report;
}

std::string VerificationReport::to_json() const {
  json doc;
  doc["ok"] = ok();
  doc["nodes_checked"] = nodes_checked;
  json fails = json::array();
  for (const auto& f : failures) {
    fails.push_back({{"node", f.node.digest}, {"message", f.message}});
  }
  doc["failures"] = std::move(fails);
  return doc.dump();
}

}  // namespace splicekit
