#include "splicekit/buildcache.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splicekit/errors.hpp"

namespace splicekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_utc() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& p, const std::string& bytes) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

BuildCache::BuildCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_ / "artifacts");
  load();
}

void BuildCache::load() {
  fs::path index = dir_ / "index.json";
  if (!fs::exists(index)) return;
  json doc;
  try {
    doc = json::parse(read_file(index));
  } catch (const json::exception& e) {
    throw IoError("malformed cache index " + index.string() + ": " + e.what());
  }
  for (const auto& ed : doc.at("entries")) {
    CacheEntry entry;
    entry.root_hash = Hash(ed.at("root").get<std::string>());
    entry.spec = spec_from_json(ed.at("spec").dump());
    entry.created_at = ed.value("created_at", std::string());
    entry.source = ed.value("source", std::string("built")) == "rewired" ? EntrySource::rewired
                                                                         : EntrySource::built;
    if (ed.value("artifact", false)) {
      entry.artifact = read_file(dir_ / "artifacts" / (entry.root_hash.digest + ".bin"));
    }
    by_name_[entry.spec.root_node().name].push_back(entry.root_hash);
    by_hash_.emplace(entry.root_hash, std::move(entry));
  }
  for (auto& [name, hashes] : by_name_) std::sort(hashes.begin(), hashes.end());
}

void BuildCache::save() const {
  if (dir_.empty()) return;
  json entries = json::array();
  for (const auto& [h, entry] : by_hash_) {
    json ed;
    ed["root"] = h.digest;
    ed["spec"] = json::parse(to_canonical_json(entry.spec));
    ed["created_at"] = entry.created_at;
    ed["source"] = entry.source == EntrySource::rewired ? "rewired" : "built";
    ed["artifact"] = entry.artifact.has_value();
    entries.push_back(std::move(ed));
  }
  json doc;
  doc["entries"] = std::move(entries);
  write_file_atomic(dir_ / "index.json", doc.dump());
}

Hash BuildCache::push(const ConcreteSpec& spec, std::optional<std::string> artifact,
                      EntrySource source) {
  // Stored hashes must agree with recomputation before anything is indexed.
  for (const auto& [h, n] : spec.nodes) {
    Hash recomputed = dag_hash(spec, h);
    if (recomputed != h) {
      throw HashMismatchError("node '" + n.name + "' stored as " + h.hash8() +
                              " but hashes to " + recomputed.hash8());
    }
  }
  validate(spec);

  bool changed = false;
  for (const auto& h : spec.full_closure(spec.root)) {
    auto it = by_hash_.find(h);
    if (it != by_hash_.end()) {
      if (h == spec.root && artifact && !it->second.artifact) {
        it->second.artifact = artifact;
        changed = true;
      }
      continue;
    }
    CacheEntry entry;
    entry.spec = spec.subspec(h);
    entry.root_hash = h;
    entry.created_at = now_utc();
    entry.source = source;
    if (h == spec.root) entry.artifact = artifact;
    by_name_[entry.spec.root_node().name].push_back(h);
    by_hash_.emplace(h, std::move(entry));
    changed = true;
  }
  for (auto& [name, hashes] : by_name_) std::sort(hashes.begin(), hashes.end());

  if (changed && !dir_.empty()) {
    for (const auto& [h, entry] : by_hash_) {
      if (entry.artifact) {
        fs::path artifact_path = dir_ / "artifacts" / (h.digest + ".bin");
        if (!fs::exists(artifact_path)) write_file_atomic(artifact_path, *entry.artifact);
      }
    }
    save();
  }
  return spec.root;
}

const CacheEntry* BuildCache::lookup(const Hash& h) const {
  auto it = by_hash_.find(h);
  return it == by_hash_.end() ? nullptr : &it->second;
}

std::vector<Hash> BuildCache::by_name(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? std::vector<Hash>{} : it->second;
}

std::vector<FactRow> BuildCache::solver_facts() const {
  std::vector<FactRow> rows;
  for (const auto& [h, entry] : by_hash_) {
    const ConcreteNode& n = entry.spec.root_node();
    rows.push_back({h, "version", {n.name, n.version.str()}});
    for (const auto& [vname, value] : n.variants) {
      rows.push_back({h, "variant", {n.name, vname, value.str()}});
    }
    rows.push_back({h, "node_os", {n.name, n.os}});
    rows.push_back({h, "node_target", {n.name, n.target}});

    std::vector<std::pair<std::string, Hash>> children;
    for (const auto& c : entry.spec.link_run_children(h)) {
      rows.push_back({h, "depends_on", {n.name, entry.spec.node(c).name, "link-run"}});
      children.emplace_back(entry.spec.node(c).name, c);
    }
    for (const auto& c : entry.spec.build_children(h)) {
      rows.push_back({h, "depends_on", {n.name, entry.spec.node(c).name, "build"}});
      children.emplace_back(entry.spec.node(c).name, c);
    }
    std::sort(children.begin(), children.end());
    children.erase(std::unique(children.begin(), children.end()), children.end());
    for (const auto& [cname, chash] : children) {
      rows.push_back({h, "hash", {cname, chash.digest}});
    }
  }
  return rows;
}

}  // namespace splicekit
