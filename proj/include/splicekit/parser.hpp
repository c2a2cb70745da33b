#ifndef SPLICEKIT_PARSER_HPP_
#define SPLICEKIT_PARSER_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "splicekit/spec.hpp"

namespace splicekit {

struct SpecToken {
  enum class Kind { name, version, enable_variant, disable_variant, key_value, dep_start, build_dep_start };

  Kind kind;
  std::string text;      // source slice without the sigil
  std::size_t position;  // byte offset of the sigil (or name start)
};

std::vector<SpecToken> tokenize_spec(const std::string& text);

// Command-line spec syntax -> AbstractSpec. The root must be named.
// Grammar: spec := node (^node | %node)*, node := name? sigil-clause*.
// Full grammar in docs/spec-grammar.md. Throws ParseError.
AbstractSpec parse_spec(const std::string& text);

// Anonymous single-node constraint ("@1.1.0+bzip"), as used by when-clauses.
// No dependency sigils allowed; the name is optional.
NodeConstraints parse_node_constraints(const std::string& text);

// Canonical single-line rendering; parse_spec(format_spec(a)) == a.
std::string format_spec(const AbstractSpec& spec);
std::string format_constraints(const NodeConstraints& c);

// Indented multi-line tree: root line, then one line per other node of the
// closure (link-run nodes with ^, build-only nodes with %).
std::string format_spec(const ConcreteSpec& spec);
// Single node rendered concretely: name@version variants os= target=.
std::string format_node(const ConcreteNode& n);

}  // namespace splicekit

#endif
