#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "astro/java_lexer.hpp"

namespace astro::java {

// Concrete syntax tree node. Kinds follow the node class names of the javalang
// AST (CompilationUnit, MethodDeclaration, ForStatement, MethodInvocation, ...).
// Identifier text, literal values, modifiers, annotations and type references
// are not retained.
struct SyntaxNode {
  std::string_view kind;
  std::vector<SyntaxNode> children;
};

// Recursive-descent parser for Java source files and for bare member snippets
// (a method or field without an enclosing class, as found in clone benchmarks).
class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  SyntaxNode parse_compilation_unit() {
    SyntaxNode unit{"CompilationUnit", {}};
    skip_annotations_before_package();
    if (at_keyword("package")) {
      advance();
      qualified_name();
      expect(";");
      unit.children.push_back({"PackageDeclaration", {}});
    }
    while (at_keyword("import")) {
      advance();
      if (at_keyword("static")) advance();
      qualified_name();
      if (accept(".")) expect("*");
      expect(";");
      unit.children.push_back({"Import", {}});
    }
    while (!at_end()) {
      if (accept(";")) continue;
      member(unit.children);
    }
    return unit;
  }

 private:
  using Nodes = std::vector<SyntaxNode>;

  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  // ---- token helpers ----------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek_tok(std::size_t ahead = 1) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == TokenKind::End; }
  void advance() {
    if (!at_end()) ++pos_;
  }

  bool at(std::string_view op) const { return cur().kind == TokenKind::Operator && cur().text == op; }
  bool at_keyword(std::string_view kw) const { return cur().kind == TokenKind::Keyword && cur().text == kw; }
  bool at_ident() const { return cur().kind == TokenKind::Identifier; }
  bool at_ident(std::string_view word) const { return at_ident() && cur().text == word; }
  static bool is_op(const Token& t, std::string_view op) { return t.kind == TokenKind::Operator && t.text == op; }
  static bool is_kw(const Token& t, std::string_view kw) { return t.kind == TokenKind::Keyword && t.text == kw; }

  bool accept(std::string_view op) {
    if (!at(op)) return false;
    advance();
    return true;
  }
  bool accept_keyword(std::string_view kw) {
    if (!at_keyword(kw)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::string got = at_end() ? "end of input" : "'" + std::string(cur().text) + "'";
    throw ParseError(what + ", got " + got, cur().line, cur().column);
  }

  void expect(std::string_view op) {
    if (!accept(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected '" + std::string(kw) + "'");
  }
  void expect_ident() {
    if (!at_ident()) fail("expected identifier");
    advance();
  }

  // True when tokens i and i+1 touch in the source (no whitespace between).
  bool adjacent(std::size_t i) const { return i + 1 < toks_.size() && toks_[i].end == toks_[i + 1].begin; }

  static bool is_primitive(const Token& t) {
    static constexpr std::string_view prims[] = {"boolean", "byte", "char", "short",
                                                 "int",     "long", "float", "double"};
    if (t.kind != TokenKind::Keyword) return false;
    for (auto p : prims)
      if (t.text == p) return true;
    return false;
  }

  void qualified_name() {
    expect_ident();
    while (at(".") && peek_tok().kind == TokenKind::Identifier) {
      advance();
      advance();
    }
  }

  // ---- annotations and modifiers -----------------------------------------

  void skip_balanced(std::string_view open, std::string_view close) {
    expect(open);
    int depth = 1;
    while (depth > 0) {
      if (at_end()) fail("unbalanced '" + std::string(open) + "'");
      if (at(open)) ++depth;
      if (at(close)) --depth;
      advance();
    }
  }

  bool at_annotation() const { return at("@") && !is_kw(peek_tok(), "interface"); }

  void annotation() {
    expect("@");
    qualified_name();
    if (at("(")) skip_balanced("(", ")");
  }

  void skip_annotations_before_package() {
    std::size_t save = pos_;
    while (at_annotation()) annotation();
    if (!at_keyword("package")) pos_ = save;
  }

  void modifiers() {
    static constexpr std::string_view mods[] = {"public",   "protected",    "private",   "static",
                                                "abstract", "final",        "native",    "synchronized",
                                                "transient", "volatile",    "strictfp",  "default"};
    for (;;) {
      if (at_annotation()) {
        annotation();
        continue;
      }
      bool matched = false;
      for (auto m : mods) {
        if (at_keyword(m)) {
          // `synchronized (` opens a statement and `default:` a switch label.
          if (m == "synchronized" && is_op(peek_tok(), "(")) return;
          if (m == "default" && (is_op(peek_tok(), ":") || is_op(peek_tok(), "->"))) return;
          advance();
          matched = true;
          break;
        }
      }
      if (!matched && (at_ident("sealed") || at_ident("non")) && !is_op(peek_tok(), "=")) {
        if (at_ident("non") && is_op(peek_tok(), "-") && peek_tok(2).text == "sealed") {
          advance();
          advance();
          advance();
          matched = true;
        } else if (at_ident("sealed") && (peek_tok().kind == TokenKind::Identifier ||
                                          peek_tok().kind == TokenKind::Keyword)) {
          advance();
          matched = true;
        }
      }
      if (!matched) return;
    }
  }

  // ---- types (non-throwing; used for speculative parses) ------------------

  bool try_type_arguments() {
    if (!accept("<")) return false;
    if (accept(">")) return true;  // diamond
    do {
      while (at_annotation()) annotation();
      if (accept("?")) {
        if (accept_keyword("extends") || accept_keyword("super")) {
          if (!try_type()) return false;
        }
      } else if (!try_type()) {
        return false;
      }
    } while (accept(","));
    return accept(">");
  }

  bool try_dims() {
    bool any = false;
    for (;;) {
      std::size_t save = pos_;
      while (at_annotation()) annotation();
      if (at("[") && is_op(peek_tok(), "]")) {
        advance();
        advance();
        any = true;
      } else {
        pos_ = save;
        return any;
      }
    }
  }

  bool try_class_type() {
    while (at_annotation()) annotation();
    if (!at_ident()) return false;
    advance();
    if (at("<") && !try_type_arguments()) return false;
    while (at(".") && (peek_tok().kind == TokenKind::Identifier || is_op(peek_tok(), "@"))) {
      advance();
      while (at_annotation()) annotation();
      if (!at_ident()) return false;
      advance();
      if (at("<") && !try_type_arguments()) return false;
    }
    return true;
  }

  // Parses a type. On failure the position is unspecified; callers restore it.
  bool try_type() {
    while (at_annotation()) annotation();
    if (is_primitive(cur()) || at_keyword("void")) {
      advance();
    } else if (!try_class_type()) {
      return false;
    }
    try_dims();
    return true;
  }

  void type() {
    std::size_t save = pos_;
    if (!try_type()) {
      pos_ = save;
      fail("expected type");
    }
  }

  void type_parameters() {
    expect("<");
    do {
      while (at_annotation()) annotation();
      expect_ident();
      if (accept_keyword("extends")) {
        type();
        while (accept("&")) type();
      }
    } while (accept(","));
    expect(">");
  }

  void type_list() {
    do type();
    while (accept(","));
  }

  // ---- declarations -------------------------------------------------------

  bool at_type_declaration_start() const {
    if (at_keyword("class") || at_keyword("interface") || at_keyword("enum")) return true;
    if (at("@") && is_kw(peek_tok(), "interface")) return true;
    return at_ident("record") && peek_tok().kind == TokenKind::Identifier && is_op(peek_tok(2), "(");
  }

  SyntaxNode type_declaration() {
    if (accept_keyword("class")) {
      expect_ident();
      if (at("<")) type_parameters();
      if (accept_keyword("extends")) type();
      if (accept_keyword("implements")) type_list();
      if (at_ident("permits")) {
        advance();
        type_list();
      }
      return {"ClassDeclaration", class_body()};
    }
    if (accept_keyword("interface")) {
      expect_ident();
      if (at("<")) type_parameters();
      if (accept_keyword("extends")) type_list();
      if (at_ident("permits")) {
        advance();
        type_list();
      }
      return {"InterfaceDeclaration", class_body()};
    }
    if (accept_keyword("enum")) {
      expect_ident();
      if (accept_keyword("implements")) type_list();
      return {"EnumDeclaration", enum_body()};
    }
    if (at("@")) {
      advance();
      expect_keyword("interface");
      expect_ident();
      return {"AnnotationDeclaration", class_body()};
    }
    if (at_ident("record")) {
      advance();
      expect_ident();
      if (at("<")) type_parameters();
      SyntaxNode rec{"RecordDeclaration", formal_parameters()};
      if (accept_keyword("implements")) type_list();
      for (auto& m : class_body()) rec.children.push_back(std::move(m));
      return rec;
    }
    fail("expected type declaration");
  }

  Nodes class_body() {
    expect("{");
    Nodes members;
    while (!accept("}")) {
      if (at_end()) fail("expected '}'");
      if (accept(";")) continue;
      member(members);
    }
    return members;
  }

  Nodes enum_body() {
    expect("{");
    Nodes members;
    while (!at(";") && !at("}")) {
      while (at_annotation()) annotation();
      expect_ident();
      SyntaxNode constant{"EnumConstantDeclaration", {}};
      if (at("(")) constant.children = arguments();
      if (at("{")) {
        for (auto& m : class_body()) constant.children.push_back(std::move(m));
      }
      members.push_back(std::move(constant));
      if (!accept(",")) break;
    }
    if (accept(";")) {
      while (!at("}")) {
        if (at_end()) fail("expected '}'");
        if (accept(";")) continue;
        member(members);
      }
    }
    expect("}");
    return members;
  }

  // One class-body member (also accepted at top level for bare snippets).
  void member(Nodes& out) {
    if (at("{")) {
      out.push_back({"BlockStatement", block()});
      return;
    }
    if (at_keyword("static") && is_op(peek_tok(), "{")) {
      advance();
      out.push_back({"BlockStatement", block()});
      return;
    }
    modifiers();
    if (at_type_declaration_start()) {
      out.push_back(type_declaration());
      return;
    }
    if (at("<")) type_parameters();
    if (at_ident() && is_op(peek_tok(), "(")) {
      advance();
      SyntaxNode ctor{"ConstructorDeclaration", formal_parameters()};
      if (accept_keyword("throws")) type_list();
      for (auto& s : block()) ctor.children.push_back(std::move(s));
      out.push_back(std::move(ctor));
      return;
    }
    // Compact record constructor: `Name { ... }`.
    if (at_ident() && is_op(peek_tok(), "{")) {
      advance();
      out.push_back({"ConstructorDeclaration", block()});
      return;
    }
    type();
    if (!at_ident()) fail("expected member name");
    if (is_op(peek_tok(), "(")) {
      advance();
      SyntaxNode method{"MethodDeclaration", formal_parameters()};
      try_dims();
      if (accept_keyword("throws")) type_list();
      if (accept_keyword("default")) {
        element_value(method.children);
        expect(";");
      } else if (!accept(";")) {
        for (auto& s : block()) method.children.push_back(std::move(s));
      }
      out.push_back(std::move(method));
      return;
    }
    SyntaxNode field{"FieldDeclaration", variable_declarators()};
    expect(";");
    out.push_back(std::move(field));
  }

  void element_value(Nodes& out) {
    if (at("@")) {
      annotation();
    } else if (at("{")) {
      skip_balanced("{", "}");
    } else {
      out.push_back(expression());
    }
  }

  Nodes formal_parameters() {
    expect("(");
    Nodes params;
    if (accept(")")) return params;
    do {
      modifiers();
      type();
      accept("...");
      if (at_keyword("this")) {
        advance();  // receiver parameter
      } else {
        expect_ident();
        try_dims();
      }
      params.push_back({"FormalParameter", {}});
    } while (accept(","));
    expect(")");
    return params;
  }

  Nodes variable_declarators() {
    Nodes decls;
    do {
      expect_ident();
      try_dims();
      SyntaxNode d{"VariableDeclarator", {}};
      if (accept("=")) d.children.push_back(variable_initializer());
      decls.push_back(std::move(d));
    } while (accept(","));
    return decls;
  }

  SyntaxNode variable_initializer() { return at("{") ? array_initializer() : expression(); }

  SyntaxNode array_initializer() {
    expect("{");
    SyntaxNode init{"ArrayInitializer", {}};
    while (!accept("}")) {
      init.children.push_back(variable_initializer());
      if (!accept(",")) {
        expect("}");
        break;
      }
    }
    return init;
  }

  // ---- statements ---------------------------------------------------------

  Nodes block() {
    expect("{");
    Nodes stmts;
    while (!accept("}")) {
      if (at_end()) fail("expected '}'");
      block_statement(stmts);
    }
    return stmts;
  }

  // Speculatively matches `[modifiers] Type Ident` followed by a declarator continuation.
  bool at_local_variable_declaration() {
    std::size_t save = pos_;
    bool had_modifier = false;
    while (at_annotation() || at_keyword("final")) {
      had_modifier = true;
      if (at("@"))
        annotation();
      else
        advance();
    }
    bool ok = try_type() && at_ident();
    if (ok) {
      const Token& after = peek_tok();
      ok = is_op(after, "=") || is_op(after, ";") || is_op(after, ",") || is_op(after, "[") || is_op(after, ":");
    }
    pos_ = save;
    return ok || (had_modifier && !at_type_declaration_after_modifiers());
  }

  bool at_type_declaration_after_modifiers() {
    std::size_t save = pos_;
    modifiers();
    bool r = at_type_declaration_start();
    pos_ = save;
    return r;
  }

  SyntaxNode local_variable_declaration() {
    modifiers();
    type();
    return {"LocalVariableDeclaration", variable_declarators()};
  }

  void block_statement(Nodes& out) {
    if ((at_annotation() || at_keyword("final") || at_keyword("abstract") || at_keyword("static") ||
         at_type_declaration_start()) &&
        at_type_declaration_after_modifiers()) {
      modifiers();
      out.push_back(type_declaration());
      return;
    }
    if (at_local_variable_declaration()) {
      out.push_back(local_variable_declaration());
      expect(";");
      return;
    }
    out.push_back(statement());
  }

  SyntaxNode statement() {
    if (at("{")) return {"BlockStatement", block()};
    if (accept(";")) return {"EmptyStatement", {}};
    if (accept_keyword("if")) {
      SyntaxNode s{"IfStatement", {}};
      s.children.push_back(par_expression());
      s.children.push_back(statement());
      if (accept_keyword("else")) s.children.push_back(statement());
      return s;
    }
    if (accept_keyword("for")) {
      SyntaxNode s{"ForStatement", {}};
      s.children.push_back(for_control());
      s.children.push_back(statement());
      return s;
    }
    if (accept_keyword("while")) {
      SyntaxNode s{"WhileStatement", {}};
      s.children.push_back(par_expression());
      s.children.push_back(statement());
      return s;
    }
    if (accept_keyword("do")) {
      SyntaxNode s{"DoStatement", {}};
      s.children.push_back(statement());
      expect_keyword("while");
      s.children.push_back(par_expression());
      expect(";");
      return s;
    }
    if (accept_keyword("try")) return try_statement();
    if (at_keyword("switch")) return switch_construct("SwitchStatement");
    if (accept_keyword("return")) {
      SyntaxNode s{"ReturnStatement", {}};
      if (!at(";")) s.children.push_back(expression());
      expect(";");
      return s;
    }
    if (accept_keyword("break")) {
      if (at_ident()) advance();
      expect(";");
      return {"BreakStatement", {}};
    }
    if (accept_keyword("continue")) {
      if (at_ident()) advance();
      expect(";");
      return {"ContinueStatement", {}};
    }
    if (accept_keyword("throw")) {
      SyntaxNode s{"ThrowStatement", {}};
      s.children.push_back(expression());
      expect(";");
      return s;
    }
    if (accept_keyword("synchronized")) {
      SyntaxNode s{"SynchronizedStatement", {}};
      s.children.push_back(par_expression());
      for (auto& b : block()) s.children.push_back(std::move(b));
      return s;
    }
    if (accept_keyword("assert")) {
      SyntaxNode s{"AssertStatement", {}};
      s.children.push_back(expression());
      if (accept(":")) s.children.push_back(expression());
      expect(";");
      return s;
    }
    if (at_ident("yield") && !is_op(peek_tok(), "=") && !is_op(peek_tok(), "(") && !is_op(peek_tok(), ".") &&
        !is_op(peek_tok(), "[") && !is_op(peek_tok(), "++") && !is_op(peek_tok(), "--")) {
      advance();
      SyntaxNode s{"YieldStatement", {}};
      s.children.push_back(expression());
      expect(";");
      return s;
    }
    if (at_ident() && is_op(peek_tok(), ":")) {
      advance();  // label
      advance();
      return statement();
    }
    SyntaxNode s{"StatementExpression", {}};
    s.children.push_back(expression());
    expect(";");
    return s;
  }

  SyntaxNode par_expression() {
    expect("(");
    SyntaxNode e = expression();
    expect(")");
    return e;
  }

  SyntaxNode for_control() {
    expect("(");
    // Enhanced for: `[final] Type name : iterable`.
    {
      std::size_t save = pos_;
      modifiers();
      if (try_type() && at_ident() && is_op(peek_tok(), ":")) {
        advance();
        advance();
        SyntaxNode var{"VariableDeclaration", {}};
        var.children.push_back({"VariableDeclarator", {}});
        SyntaxNode control{"EnhancedForControl", {}};
        control.children.push_back(std::move(var));
        control.children.push_back(expression());
        expect(")");
        return control;
      }
      pos_ = save;
    }
    SyntaxNode control{"ForControl", {}};
    if (!at(";")) {
      if (at_local_variable_declaration()) {
        control.children.push_back(local_variable_declaration());
      } else {
        do control.children.push_back(expression());
        while (accept(","));
      }
    }
    expect(";");
    if (!at(";")) control.children.push_back(expression());
    expect(";");
    if (!at(")")) {
      do control.children.push_back(expression());
      while (accept(","));
    }
    expect(")");
    return control;
  }

  SyntaxNode try_statement() {
    SyntaxNode s{"TryStatement", {}};
    if (accept("(")) {
      while (!accept(")")) {
        SyntaxNode res{"TryResource", {}};
        if (at_local_variable_declaration()) {
          modifiers();
          type();
          expect_ident();
          expect("=");
          res.children.push_back(expression());
        } else {
          res.children.push_back(expression());
        }
        s.children.push_back(std::move(res));
        if (!accept(";")) {
          expect(")");
          break;
        }
      }
    }
    for (auto& b : block()) s.children.push_back(std::move(b));
    while (accept_keyword("catch")) {
      expect("(");
      modifiers();
      type();
      while (accept("|")) type();
      expect_ident();
      expect(")");
      SyntaxNode c{"CatchClause", {}};
      c.children.push_back({"CatchClauseParameter", {}});
      for (auto& b : block()) c.children.push_back(std::move(b));
      s.children.push_back(std::move(c));
    }
    if (accept_keyword("finally")) {
      for (auto& b : block()) s.children.push_back(std::move(b));
    }
    return s;
  }

  // Shared by switch statements and switch expressions, both colon and arrow forms.
  SyntaxNode switch_construct(std::string_view kind) {
    expect_keyword("switch");
    SyntaxNode s{kind, {}};
    s.children.push_back(par_expression());
    expect("{");
    while (!accept("}")) {
      SyntaxNode c{"SwitchStatementCase", {}};
      if (accept_keyword("default")) {
      } else if (accept_keyword("case")) {
        do c.children.push_back(case_label());
        while (accept(","));
      } else {
        fail("expected 'case' or 'default'");
      }
      if (accept("->")) {
        if (at("{")) {
          c.children.push_back({"BlockStatement", block()});
        } else if (at_keyword("throw")) {
          c.children.push_back(statement());
        } else {
          SyntaxNode e{"StatementExpression", {}};
          e.children.push_back(expression());
          expect(";");
          c.children.push_back(std::move(e));
        }
      } else {
        expect(":");
        while (!at_keyword("case") && !at_keyword("default") && !at("}")) {
          if (at_end()) fail("expected '}'");
          block_statement(c.children);
        }
      }
      s.children.push_back(std::move(c));
    }
    return s;
  }

  SyntaxNode case_label() {
    // Type patterns: `case String s ->`.
    std::size_t save = pos_;
    if (try_type() && at_ident() && (is_op(peek_tok(), "->") || is_op(peek_tok(), ":") || is_op(peek_tok(), ","))) {
      advance();
      return {"TypePattern", {}};
    }
    pos_ = save;
    return ternary();
  }

  // ---- expressions --------------------------------------------------------

  Nodes arguments() {
    expect("(");
    Nodes args;
    if (accept(")")) return args;
    do args.push_back(expression());
    while (accept(","));
    expect(")");
    return args;
  }

  std::size_t matching_paren(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open; i < toks_.size(); ++i) {
      if (is_op(toks_[i], "(")) ++depth;
      if (is_op(toks_[i], ")") && --depth == 0) return i;
    }
    return toks_.size() - 1;
  }

  bool at_lambda() const {
    if (at_ident() && is_op(peek_tok(), "->")) return true;
    if (!at("(")) return false;
    std::size_t close = matching_paren(pos_);
    return close + 1 < toks_.size() && is_op(toks_[close + 1], "->");
  }

  SyntaxNode lambda() {
    SyntaxNode l{"LambdaExpression", {}};
    if (at_ident()) {
      advance();
      l.children.push_back({"InferredFormalParameter", {}});
    } else {
      expect("(");
      if (!accept(")")) {
        do {
          if (at_ident() && (is_op(peek_tok(), ",") || is_op(peek_tok(), ")"))) {
            advance();
            l.children.push_back({"InferredFormalParameter", {}});
          } else {
            modifiers();
            type();
            accept("...");
            expect_ident();
            try_dims();
            l.children.push_back({"FormalParameter", {}});
          }
        } while (accept(","));
        expect(")");
      }
    }
    expect("->");
    if (at("{")) {
      for (auto& s : block()) l.children.push_back(std::move(s));
    } else {
      l.children.push_back(expression());
    }
    return l;
  }

  // Number of tokens forming an assignment operator at the cursor, 0 if none.
  std::size_t assignment_operator_length() const {
    static constexpr std::string_view simple[] = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<="};
    for (auto op : simple)
      if (at(op)) return 1;
    if (at(">") && adjacent(pos_) && is_op(peek_tok(), ">")) {
      if (adjacent(pos_ + 1) && is_op(peek_tok(2), "=")) return 3;  // >>=
      if (adjacent(pos_ + 1) && is_op(peek_tok(2), ">") && adjacent(pos_ + 2) && is_op(peek_tok(3), "="))
        return 4;  // >>>=
    }
    return 0;
  }

  SyntaxNode expression() {
    if (at_lambda()) return lambda();
    SyntaxNode lhs = ternary();
    if (std::size_t n = assignment_operator_length()) {
      pos_ += n;
      SyntaxNode a{"Assignment", {}};
      a.children.push_back(std::move(lhs));
      a.children.push_back(expression());
      return a;
    }
    return lhs;
  }

  SyntaxNode ternary() {
    SyntaxNode cond = binary(1);
    if (!accept("?")) return cond;
    SyntaxNode t{"TernaryExpression", {}};
    t.children.push_back(std::move(cond));
    t.children.push_back(at_lambda() ? lambda() : ternary());
    expect(":");
    t.children.push_back(at_lambda() ? lambda() : ternary());
    return t;
  }

  // Binary operator at the cursor: precedence (0 if none) and token length.
  std::pair<int, std::size_t> binary_operator() const {
    if (cur().kind == TokenKind::Keyword && cur().text == "instanceof") return {7, 1};
    if (cur().kind != TokenKind::Operator) return {0, 0};
    std::string_view t = cur().text;
    if (t == ">") {
      if (assignment_operator_length() != 0) return {0, 0};
      if (adjacent(pos_) && is_op(peek_tok(), "=")) return {7, 2};  // >=
      if (adjacent(pos_) && is_op(peek_tok(), ">")) {
        if (adjacent(pos_ + 1) && is_op(peek_tok(2), ">")) return {8, 3};  // >>>
        return {8, 2};                                                     // >>
      }
      return {7, 1};
    }
    if (t == "||") return {1, 1};
    if (t == "&&") return {2, 1};
    if (t == "|") return {3, 1};
    if (t == "^") return {4, 1};
    if (t == "&") return {5, 1};
    if (t == "==" || t == "!=") return {6, 1};
    if (t == "<" || t == "<=") return {7, 1};
    if (t == "<<") return {8, 1};
    if (t == "+" || t == "-") return {9, 1};
    if (t == "*" || t == "/" || t == "%") return {10, 1};
    return {0, 0};
  }

  SyntaxNode binary(int min_prec) {
    SyntaxNode lhs = unary();
    for (;;) {
      auto [prec, len] = binary_operator();
      if (prec == 0 || prec < min_prec) return lhs;
      bool is_instanceof = at_keyword("instanceof");
      pos_ += len;
      SyntaxNode op{"BinaryOperation", {}};
      op.children.push_back(std::move(lhs));
      if (is_instanceof) {
        accept_keyword("final");
        type();
        if (at_ident()) advance();  // pattern binding
      } else {
        op.children.push_back(binary(prec + 1));
      }
      lhs = std::move(op);
    }
  }

  // Decides whether `(` at the cursor opens a cast; on success leaves the cursor after `)`.
  bool try_cast_prefix() {
    if (!at("(")) return false;
    std::size_t save = pos_;
    advance();
    bool primitive = is_primitive(cur());
    if (!try_type()) {
      pos_ = save;
      return false;
    }
    while (accept("&")) {
      if (!try_type()) {
        pos_ = save;
        return false;
      }
    }
    if (!accept(")")) {
      pos_ = save;
      return false;
    }
    if (primitive) return true;
    const Token& t = cur();
    bool starts_operand = t.kind == TokenKind::Identifier || t.kind == TokenKind::Literal ||
                          is_op(t, "(") || is_op(t, "!") || is_op(t, "~") || is_kw(t, "this") ||
                          is_kw(t, "super") || is_kw(t, "new") || is_kw(t, "switch") || is_primitive(t);
    if (!starts_operand) pos_ = save;
    return starts_operand;
  }

  SyntaxNode unary() {
    if (at("+") || at("-") || at("++") || at("--") || at("!") || at("~")) {
      advance();
      return unary();  // prefix operators annotate their operand, no node of their own
    }
    if (try_cast_prefix()) {
      SyntaxNode c{"Cast", {}};
      c.children.push_back(at_lambda() ? lambda() : unary());
      return c;
    }
    SyntaxNode e = primary();
    e = selectors(std::move(e));
    while (at("++") || at("--")) advance();
    return e;
  }

  SyntaxNode creator(Nodes outer) {
    if (at("<")) try_type_arguments();
    while (at_annotation()) annotation();
    if (is_primitive(cur())) {
      advance();
    } else if (!try_class_type()) {
      fail("expected type after 'new'");
    }
    if (at("[")) {
      SyntaxNode arr{"ArrayCreator", std::move(outer)};
      while (at("[")) {
        advance();
        if (!accept("]")) {
          arr.children.push_back(expression());
          expect("]");
        }
      }
      if (at("{")) arr.children.push_back(array_initializer());
      return arr;
    }
    SyntaxNode obj{"ClassCreator", std::move(outer)};
    for (auto& a : arguments()) obj.children.push_back(std::move(a));
    if (at("{")) {
      for (auto& m : class_body()) obj.children.push_back(std::move(m));
    }
    return obj;
  }

  SyntaxNode method_invocation(std::string_view kind, Nodes target) {
    SyntaxNode call{kind, std::move(target)};
    for (auto& a : arguments()) call.children.push_back(std::move(a));
    return call;
  }

  SyntaxNode primary() {
    const Token& t = cur();
    if (t.kind == TokenKind::Literal) {
      advance();
      return {"Literal", {}};
    }
    if (at("(")) {
      advance();
      SyntaxNode inner = expression();
      expect(")");
      return inner;
    }
    if (accept_keyword("this")) {
      if (at("(")) return method_invocation("ExplicitConstructorInvocation", {});
      if (at(".") && peek_tok().kind == TokenKind::Identifier) {
        if (is_op(peek_tok(2), "(")) {
          advance();
          advance();
          return method_invocation("MethodInvocation", {});
        }
        return name_chain_after_qualifier();
      }
      return {"This", {}};
    }
    if (accept_keyword("super")) {
      if (at("(")) return method_invocation("SuperConstructorInvocation", {});
      if (accept("::")) {
        advance();
        return {"MethodReference", {}};
      }
      expect(".");
      if (at("<")) try_type_arguments();
      expect_ident();
      if (at("(")) return method_invocation("SuperMethodInvocation", {});
      return {"SuperMemberReference", {}};
    }
    if (accept_keyword("new")) return creator({});
    if (at_keyword("switch")) return switch_construct("SwitchExpression");
    if (is_primitive(t) || at_keyword("void")) {
      advance();
      try_dims();
      if (accept("::")) {
        advance();
        return {"MethodReference", {}};
      }
      expect(".");
      expect_keyword("class");
      return {"ClassReference", {}};
    }
    if (at("<")) {
      // Generic method reference type like `List<String>::size` is rare; not supported.
      fail("unexpected '<'");
    }
    if (at_ident()) return name_expression();
    fail("expected expression");
  }

  // `this.a.b` once `this` has been consumed and the cursor sits on '.'.
  SyntaxNode name_chain_after_qualifier() {
    while (at(".") && peek_tok().kind == TokenKind::Identifier && !is_op(peek_tok(2), "(")) {
      advance();
      advance();
    }
    if (at(".") && peek_tok().kind == TokenKind::Identifier && is_op(peek_tok(2), "(")) {
      advance();
      advance();
      return method_invocation("MethodInvocation", {});
    }
    return {"MemberReference", {}};
  }

  // A dotted name, possibly ending in a call; plain qualifiers are absorbed into the node.
  SyntaxNode name_expression() {
    // Generic type followed by `::`, e.g. `Map.Entry<K, V>::getKey`.
    {
      std::size_t save = pos_;
      if (try_class_type() && try_dims_or_nothing() && at("::")) {
        advance();
        if (!accept_keyword("new")) expect_ident();
        return {"MethodReference", {}};
      }
      pos_ = save;
    }
    expect_ident();
    if (at("(")) return method_invocation("MethodInvocation", {});
    for (;;) {
      if (at(".") && peek_tok().kind == TokenKind::Identifier) {
        advance();
        advance();
        if (at("(")) return method_invocation("MethodInvocation", {});
        continue;
      }
      if (at(".") && is_op(peek_tok(), "<")) {
        advance();
        try_type_arguments();
        expect_ident();
        return method_invocation("MethodInvocation", {});
      }
      if (at(".") && is_kw(peek_tok(), "class")) {
        advance();
        advance();
        return {"ClassReference", {}};
      }
      if (at(".") && is_kw(peek_tok(), "this")) {
        advance();
        advance();
        return {"This", {}};
      }
      if (at("[") && is_op(peek_tok(), "]")) {
        try_dims();
        if (accept("::")) {
          if (!accept_keyword("new")) expect_ident();
          return {"MethodReference", {}};
        }
        expect(".");
        expect_keyword("class");
        return {"ClassReference", {}};
      }
      return {"MemberReference", {}};
    }
  }

  bool try_dims_or_nothing() {
    try_dims();
    return true;
  }

  SyntaxNode selectors(SyntaxNode e) {
    for (;;) {
      if (at(".")) {
        const Token& n = peek_tok();
        if (n.kind == TokenKind::Identifier) {
          advance();
          advance();
          Nodes target;
          target.push_back(std::move(e));
          if (at("(")) {
            e = method_invocation("MethodInvocation", std::move(target));
          } else {
            e = SyntaxNode{"MemberReference", std::move(target)};
          }
          continue;
        }
        if (is_op(n, "<")) {
          advance();
          try_type_arguments();
          expect_ident();
          Nodes target;
          target.push_back(std::move(e));
          e = method_invocation("MethodInvocation", std::move(target));
          continue;
        }
        if (is_kw(n, "new")) {
          advance();
          advance();
          Nodes outer;
          outer.push_back(std::move(e));
          e = creator(std::move(outer));
          continue;
        }
        fail("expected member after '.'");
      }
      if (at("[")) {
        advance();
        SyntaxNode sel{"ArraySelector", {}};
        sel.children.push_back(std::move(e));
        sel.children.push_back(expression());
        expect("]");
        e = std::move(sel);
        continue;
      }
      if (at("::")) {
        advance();
        if (!accept_keyword("new")) expect_ident();
        SyntaxNode ref{"MethodReference", {}};
        ref.children.push_back(std::move(e));
        e = std::move(ref);
        continue;
      }
      return e;
    }
  }
};

inline SyntaxNode parse_java(std::string_view source) { return Parser(source).parse_compilation_unit(); }

}  // namespace astro::java
