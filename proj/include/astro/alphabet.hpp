#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "astro/error.hpp"

namespace astro {

using TypeId = std::uint16_t;

inline constexpr std::string_view kCatchAllType = "Other";

// Canonical node-type vocabulary plus the table that maps parser node kinds onto it.
// Kinds missing from the table resolve to the catch-all type "Other".
class NodeTypeAlphabet {
 public:
  NodeTypeAlphabet(std::vector<std::string> types, std::map<std::string, std::string> mapping)
      : types_(std::move(types)), mapping_(std::move(mapping)) {
    if (types_.empty()) throw AlphabetError("alphabet has no types");
    if (types_.size() > 0xffff) throw AlphabetError("alphabet too large");
    for (std::size_t i = 0; i < types_.size(); ++i) {
      if (types_[i].empty()) throw AlphabetError("empty type name at index " + std::to_string(i));
      if (!index_.emplace(types_[i], static_cast<TypeId>(i)).second)
        throw AlphabetError("duplicate type name '" + types_[i] + "'");
    }
    auto other = index_.find(std::string(kCatchAllType));
    if (other == index_.end()) throw AlphabetError("alphabet must contain the catch-all type 'Other'");
    other_ = other->second;
    for (const auto& [kind, target] : mapping_) {
      auto it = index_.find(target);
      if (it == index_.end())
        throw AlphabetError("mapping for '" + kind + "' references unknown type '" + target + "'");
      kind_index_.emplace(kind, it->second);
    }
  }

  std::size_t size() const noexcept { return types_.size(); }
  const std::vector<std::string>& types() const noexcept { return types_; }
  const std::map<std::string, std::string>& mapping() const noexcept { return mapping_; }
  const std::string& name(TypeId id) const { return types_.at(id); }
  TypeId other() const noexcept { return other_; }

  std::optional<TypeId> find(std::string_view type_name) const {
    auto it = index_.find(std::string(type_name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Canonical type of a concrete grammar kind.
  TypeId resolve(std::string_view kind) const {
    auto it = kind_index_.find(std::string(kind));
    return it == kind_index_.end() ? other_ : it->second;
  }

  bool operator==(const NodeTypeAlphabet& o) const { return types_ == o.types_ && mapping_ == o.mapping_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["types"] = types_;
    j["mapping"] = mapping_;
    return j;
  }

  static NodeTypeAlphabet from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("types") || !j["types"].is_array())
      throw AlphabetError("alphabet JSON needs a 'types' array");
    std::vector<std::string> types;
    for (const auto& t : j["types"]) {
      if (!t.is_string()) throw AlphabetError("alphabet 'types' entries must be strings");
      types.push_back(t.get<std::string>());
    }
    std::map<std::string, std::string> mapping;
    if (j.contains("mapping")) {
      if (!j["mapping"].is_object()) throw AlphabetError("alphabet 'mapping' must be an object");
      for (const auto& [k, v] : j["mapping"].items()) {
        if (!v.is_string()) throw AlphabetError("mapping target for '" + k + "' must be a string");
        mapping.emplace(k, v.get<std::string>());
      }
    }
    return NodeTypeAlphabet(std::move(types), std::move(mapping));
  }

  static NodeTypeAlphabet load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open alphabet file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string(), 0, e.what());
    }
    return from_json(j);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
  }

 private:
  std::vector<std::string> types_;
  std::map<std::string, std::string> mapping_;
  std::unordered_map<std::string, TypeId> index_;
  std::unordered_map<std::string, TypeId> kind_index_;
  TypeId other_ = 0;
};

// The built-in 19-type alphabet. Names follow the declaration/statement/expression
// node classes of common Java AST libraries; data/alphabet.json holds the same table.
inline NodeTypeAlphabet default_alphabet() {
  std::vector<std::string> types = {
      "CompilationUnit",   "ClassDeclaration", "FieldDeclaration",    "MethodDeclaration",
      "FormalParameter",   "LocalVariableDeclaration", "BlockStatement", "IfStatement",
      "ForStatement",      "WhileStatement",   "ReturnStatement",     "TryStatement",
      "StatementExpression", "Assignment",     "MethodInvocation",    "BinaryOperation",
      "Literal",           "MemberReference",  "Other"};
  std::map<std::string, std::string> mapping = {
      {"CompilationUnit", "CompilationUnit"},
      {"ClassDeclaration", "ClassDeclaration"},
      {"InterfaceDeclaration", "ClassDeclaration"},
      {"EnumDeclaration", "ClassDeclaration"},
      {"AnnotationDeclaration", "ClassDeclaration"},
      {"RecordDeclaration", "ClassDeclaration"},
      {"FieldDeclaration", "FieldDeclaration"},
      {"ConstantDeclaration", "FieldDeclaration"},
      {"MethodDeclaration", "MethodDeclaration"},
      {"ConstructorDeclaration", "MethodDeclaration"},
      {"FormalParameter", "FormalParameter"},
      {"InferredFormalParameter", "FormalParameter"},
      {"CatchClauseParameter", "FormalParameter"},
      {"LocalVariableDeclaration", "LocalVariableDeclaration"},
      {"VariableDeclaration", "LocalVariableDeclaration"},
      {"TryResource", "LocalVariableDeclaration"},
      {"BlockStatement", "BlockStatement"},
      {"IfStatement", "IfStatement"},
      {"ForStatement", "ForStatement"},
      {"WhileStatement", "WhileStatement"},
      {"DoStatement", "WhileStatement"},
      {"ReturnStatement", "ReturnStatement"},
      {"TryStatement", "TryStatement"},
      {"StatementExpression", "StatementExpression"},
      {"Assignment", "Assignment"},
      {"MethodInvocation", "MethodInvocation"},
      {"SuperMethodInvocation", "MethodInvocation"},
      {"ExplicitConstructorInvocation", "MethodInvocation"},
      {"SuperConstructorInvocation", "MethodInvocation"},
      {"BinaryOperation", "BinaryOperation"},
      {"Literal", "Literal"},
      {"MemberReference", "MemberReference"},
  };
  return NodeTypeAlphabet(std::move(types), std::move(mapping));
}

}  // namespace astro
