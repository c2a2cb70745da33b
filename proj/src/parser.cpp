#include "splicekit/parser.hpp"

#include <algorithm>
#include <cctype>

#include "splicekit/errors.hpp"

namespace splicekit {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
bool is_name_char(char c) { return is_name_start(c) || c == '-'; }
bool is_version_char(char c) { return (c >= '0' && c <= '9') || c == '.' || c == ':'; }
bool is_sigil(char c) {
  return c == '@' || c == '+' || c == '~' || c == '^' || c == '%' || c == '=';
}

std::string read_while(const std::string& text, std::size_t& pos, bool (*pred)(char)) {
  std::size_t start = pos;
  while (pos < text.size() && pred(text[pos])) ++pos;
  return text.substr(start, pos - start);
}

}  // namespace

std::vector<SpecToken> tokenize_spec(const std::string& text) {
  std::vector<SpecToken> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    std::size_t at = pos;
    if (c == '^' || c == '%') {
      ++pos;
      tokens.push_back({c == '^' ? SpecToken::Kind::dep_start : SpecToken::Kind::build_dep_start, "", at});
    } else if (c == '@') {
      ++pos;
      std::string body = read_while(text, pos, is_version_char);
      if (body.empty()) throw ParseError("dangling '@' sigil", at, {"version"});
      tokens.push_back({SpecToken::Kind::version, body, at});
    } else if (c == '+' || c == '~') {
      ++pos;
      std::string body = read_while(text, pos, is_name_char);
      if (body.empty() || !is_name_start(body[0])) {
        throw ParseError(std::string("dangling '") + c + "' sigil", at, {"variant name"});
      }
      tokens.push_back(
          {c == '+' ? SpecToken::Kind::enable_variant : SpecToken::Kind::disable_variant, body, at});
    } else if (is_name_start(c)) {
      std::string ident = read_while(text, pos, is_name_char);
      if (pos < text.size() && text[pos] == '=') {
        ++pos;
        std::size_t vstart = pos;
        while (pos < text.size() && !is_space(text[pos]) && !is_sigil(text[pos])) ++pos;
        std::string value = text.substr(vstart, pos - vstart);
        if (value.empty()) throw ParseError("missing value after '" + ident + "='", at, {"value"});
        tokens.push_back({SpecToken::Kind::key_value, ident + "=" + value, at});
      } else {
        tokens.push_back({SpecToken::Kind::name, ident, at});
      }
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", at,
                       {"name", "@", "+", "~", "^", "%"});
    }
  }
  return tokens;
}

namespace {

VersionConstraint parse_version_constraint(const std::string& body, std::size_t at) {
  auto colon = body.find(':');
  try {
    if (colon == std::string::npos) {
      return VersionConstraint::exact_or_prefix(Version::parse(body));
    }
    std::string lo = body.substr(0, colon);
    std::string hi = body.substr(colon + 1);
    if (hi.find(':') != std::string::npos) {
      throw ParseError("malformed version range '" + body + "'", at, {"version range"});
    }
    std::optional<Version> lov, hiv;
    if (!lo.empty()) lov = Version::parse(lo);
    if (!hi.empty()) hiv = Version::parse(hi);
    return VersionConstraint::range(std::move(lov), std::move(hiv));
  } catch (const ParseError&) {
    throw ParseError("malformed version '" + body + "'", at, {"version"});
  } catch (const ConflictError& e) {
    throw ParseError(std::string("malformed version range: ") + e.what(), at, {"version range"});
  }
}

struct NodeBuilder {
  NodeConstraints node;
  bool has_name = false;
  bool has_version = false;
  bool clauses_seen = false;

  void apply(const SpecToken& tok) {
    switch (tok.kind) {
      case SpecToken::Kind::name:
        if (has_name || clauses_seen) {
          throw ParseError("unexpected second name '" + tok.text + "' in one node", tok.position,
                           {"@", "+", "~", "^", "%", "key=value"});
        }
        node.name = tok.text;
        has_name = true;
        break;
      case SpecToken::Kind::version:
        if (has_version) {
          throw ParseError("duplicate version clause '@" + tok.text + "'", tok.position, {"single @"});
        }
        node.version = parse_version_constraint(tok.text, tok.position);
        has_version = true;
        clauses_seen = true;
        break;
      case SpecToken::Kind::enable_variant:
      case SpecToken::Kind::disable_variant: {
        bool value = tok.kind == SpecToken::Kind::enable_variant;
        if (!node.variants.emplace(tok.text, VariantValue(value)).second) {
          throw ParseError("duplicate variant clause for '" + tok.text + "'", tok.position,
                           {"distinct variant"});
        }
        clauses_seen = true;
        break;
      }
      case SpecToken::Kind::key_value: {
        auto eq = tok.text.find('=');
        std::string key = tok.text.substr(0, eq);
        std::string value = tok.text.substr(eq + 1);
        if (key == "os" || key == "target") {
          auto& field = key == "os" ? node.os : node.target;
          if (field) {
            throw ParseError("duplicate " + key + " clause", tok.position, {"single " + key});
          }
          field = value;
        } else if (key == "arch") {
          // platform-os-target triple, or os-target pair.
          std::vector<std::string> parts;
          std::size_t start = 0;
          while (true) {
            auto dash = value.find('-', start);
            parts.push_back(value.substr(start, dash == std::string::npos ? dash : dash - start));
            if (dash == std::string::npos) break;
            start = dash + 1;
          }
          if (parts.size() != 2 && parts.size() != 3) {
            throw ParseError("malformed arch triple '" + value + "'", tok.position,
                             {"platform-os-target"});
          }
          if (node.os || node.target) {
            throw ParseError("duplicate os/target via arch clause", tok.position, {"single arch"});
          }
          node.os = parts[parts.size() - 2];
          node.target = parts[parts.size() - 1];
        } else {
          VariantValue v = value == "true"    ? VariantValue(true)
                           : value == "false" ? VariantValue(false)
                                              : VariantValue(value);
          if (!node.variants.emplace(key, std::move(v)).second) {
            throw ParseError("duplicate variant clause for '" + key + "'", tok.position,
                             {"distinct variant"});
          }
        }
        clauses_seen = true;
        break;
      }
      default:
        break;
    }
  }
};

}  // namespace

AbstractSpec parse_spec(const std::string& text) {
  auto tokens = tokenize_spec(text);
  AbstractSpec spec;

  NodeBuilder current;
  std::optional<EdgeKind> current_kind;  // nullopt while building the root
  bool root_done = false;

  auto flush = [&](std::size_t err_pos) {
    if (!current.has_name) {
      throw ParseError("empty name where required", err_pos, {"package name"});
    }
    if (!root_done) {
      spec.root = std::move(current.node);
      root_done = true;
    } else {
      for (const auto& [dep, kind] : spec.dependencies) {
        if (dep.name == current.node.name) {
          throw ParseError("duplicate dependency constraint for '" + dep.name + "'", err_pos,
                           {"unique dependency names"});
        }
      }
      spec.dependencies.emplace_back(std::move(current.node), *current_kind);
    }
    current = NodeBuilder{};
  };

  std::size_t last_pos = 0;
  for (const auto& tok : tokens) {
    if (tok.kind == SpecToken::Kind::dep_start || tok.kind == SpecToken::Kind::build_dep_start) {
      flush(tok.position);
      current_kind = tok.kind == SpecToken::Kind::dep_start ? EdgeKind::link_run : EdgeKind::build;
    } else {
      current.apply(tok);
    }
    last_pos = tok.position;
  }
  if (tokens.empty()) {
    throw ParseError("empty spec", 0, {"package name"});
  }
  flush(last_pos);
  return spec;
}

NodeConstraints parse_node_constraints(const std::string& text) {
  auto tokens = tokenize_spec(text);
  NodeBuilder builder;
  for (const auto& tok : tokens) {
    if (tok.kind == SpecToken::Kind::dep_start || tok.kind == SpecToken::Kind::build_dep_start) {
      throw ParseError("dependency sigil not allowed in a single-node constraint", tok.position,
                       {"@", "+", "~", "key=value"});
    }
    builder.apply(tok);
  }
  return builder.node;
}

std::string format_constraints(const NodeConstraints& c) {
  std::string out = c.name;
  if (c.version) out += c.version->str();
  for (const auto& [name, value] : c.variants) {
    if (value.is_bool()) out += (value.as_bool() ? "+" : "~") + name;
  }
  for (const auto& [name, value] : c.variants) {
    if (!value.is_bool()) out += " " + name + "=" + value.as_string();
  }
  if (c.os) out += " os=" + *c.os;
  if (c.target) out += " target=" + *c.target;
  return out;
}

std::string format_spec(const AbstractSpec& spec) {
  std::string out = format_constraints(spec.root);
  for (const auto& [dep, kind] : spec.dependencies) {
    out += kind == EdgeKind::build ? " %" : " ^";
    out += format_constraints(dep);
  }
  return out;
}

std::string format_node(const ConcreteNode& n) {
  NodeConstraints c;
  c.name = n.name;
  c.version = VersionConstraint::exact_or_prefix(n.version);
  c.variants = n.variants;
  c.os = n.os;
  c.target = n.target;
  return format_constraints(c);
}

std::string format_spec(const ConcreteSpec& spec) {
  std::string out = format_node(spec.root_node());
  auto link_run = spec.link_run_closure(spec.root);

  std::vector<Hash> rest;
  for (const auto& [h, n] : spec.nodes) {
    if (h != spec.root) rest.push_back(h);
  }
  std::sort(rest.begin(), rest.end(), [&](const Hash& a, const Hash& b) {
    const auto& na = spec.node(a).name;
    const auto& nb = spec.node(b).name;
    return std::tie(na, a) < std::tie(nb, b);
  });
  std::stable_sort(rest.begin(), rest.end(), [&](const Hash& a, const Hash& b) {
    return link_run.count(a) > link_run.count(b);
  });
  for (const auto& h : rest) {
    out += "\n    ";
    out += link_run.count(h) ? "^" : "%";
    out += format_node(spec.node(h));
  }
  return out;
}

}  // namespace splicekit
