#pragma once

#include <string>
#include <string_view>

#include "astro/alphabet.hpp"
#include "astro/ast.hpp"
#include "astro/java_parser.hpp"

namespace astro {

inline AstNode to_ast(const java::SyntaxNode& node, const NodeTypeAlphabet& alphabet, std::size_t depth = 0) {
  AstNode out{alphabet.resolve(node.kind), depth, {}};
  out.children.reserve(node.children.size());
  for (const auto& c : node.children) out.children.push_back(to_ast(c, alphabet, depth + 1));
  return out;
}

// Parses Java source (a compilation unit or bare class-body members) into an
// AST over the alphabet's canonical types. Throws ParseError on invalid input.
inline AstNode parse(std::string_view source, const NodeTypeAlphabet& alphabet) {
  return to_ast(java::parse_java(source), alphabet);
}

// parse followed by truncate.
inline TruncatedAst parse_truncated(std::string_view source, const NodeTypeAlphabet& alphabet, std::size_t k,
                                    std::string source_id = {}) {
  return truncate(parse(source, alphabet), k, std::move(source_id));
}

// Indented dump of the concrete tree, one node kind per line.
inline void dump_syntax(const java::SyntaxNode& n, std::string& out, std::size_t indent = 0) {
  out.append(indent * 2, ' ');
  out += n.kind;
  out += '\n';
  for (const auto& c : n.children) dump_syntax(c, out, indent + 1);
}

}  // namespace astro
