#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "astro/error.hpp"

namespace astro::java {

enum class TokenKind { Identifier, Keyword, Literal, Operator, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string_view text;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
};

inline bool is_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> keywords = {
      "abstract", "assert",     "boolean",   "break",     "byte",     "case",      "catch",
      "char",     "class",      "const",     "continue",  "default",  "do",        "double",
      "else",     "enum",       "extends",   "final",     "finally",  "float",     "for",
      "goto",     "if",         "implements", "import",   "instanceof", "int",     "interface",
      "long",     "native",     "new",       "package",   "private",  "protected", "public",
      "return",   "short",      "static",    "strictfp",  "super",    "switch",    "synchronized",
      "this",     "throw",      "throws",    "transient", "try",      "void",      "volatile",
      "while"};
  return keywords.count(word) != 0;
}

// Splits Java source into tokens, discarding whitespace and comments.
// '>' is always emitted as a single-character token; the parser reassembles
// shift and comparison operators from adjacent '>' tokens so that nested
// generic closers like `>>` need no special casing.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        out.push_back(Token{TokenKind::End, {}, line_, column(), pos_, pos_});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;

  std::size_t column() const { return pos_ - line_start_ + 1; }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column()); }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        std::size_t l = line_, col = column();
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) throw ParseError("unterminated comment", l, col);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool ident_part(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

  Token make(TokenKind kind, std::size_t start, std::size_t line, std::size_t col) const {
    return Token{kind, src_.substr(start, pos_ - start), line, col, start, pos_};
  }

  Token next() {
    const std::size_t start = pos_, line = line_, col = column();
    const char c = peek();
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_part(peek())) advance();
      auto word = src_.substr(start, pos_ - start);
      if (word == "true" || word == "false" || word == "null") return make(TokenKind::Literal, start, line, col);
      return make(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, start, line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number();
      return make(TokenKind::Literal, start, line, col);
    }
    if (c == '"') {
      if (peek(1) == '"' && peek(2) == '"') {
        lex_text_block();
      } else {
        lex_quoted('"');
      }
      return make(TokenKind::Literal, start, line, col);
    }
    if (c == '\'') {
      lex_quoted('\'');
      return make(TokenKind::Literal, start, line, col);
    }
    lex_operator();
    return make(TokenKind::Operator, start, line, col);
  }

  void lex_number() {
    auto digits = [&](auto pred) {
      while (pos_ < src_.size() && (pred(peek()) || peek() == '_')) advance();
    };
    auto dec = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
    auto hex = [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)) != 0; };
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      digits(hex);
      if (peek() == '.') {
        advance();
        digits(hex);
      }
      if (peek() == 'p' || peek() == 'P') {
        advance();
        if (peek() == '+' || peek() == '-') advance();
        digits(dec);
      }
    } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
      advance();
      advance();
      digits([](char ch) { return ch == '0' || ch == '1'; });
    } else {
      digits(dec);
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        advance();
        digits(dec);
      } else if (peek() == '.' && !ident_start(peek(1)) && peek(1) != '.') {
        advance();  // `1.` is a valid double literal
      }
      if (peek() == 'e' || peek() == 'E') {
        advance();
        if (peek() == '+' || peek() == '-') advance();
        digits(dec);
      }
    }
    if (std::string_view("lLfFdD").find(peek()) != std::string_view::npos && peek() != '\0') advance();
  }

  void lex_quoted(char quote) {
    std::size_t l = line_, col = column();
    advance();
    while (pos_ < src_.size() && peek() != quote) {
      if (peek() == '\n') throw ParseError("unterminated literal", l, col);
      if (peek() == '\\') advance();
      if (pos_ < src_.size()) advance();
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated literal", l, col);
    advance();
  }

  void lex_text_block() {
    std::size_t l = line_, col = column();
    advance();
    advance();
    advance();
    while (pos_ < src_.size() && !(peek() == '"' && peek(1) == '"' && peek(2) == '"')) {
      if (peek() == '\\') advance();
      if (pos_ < src_.size()) advance();
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated text block", l, col);
    advance();
    advance();
    advance();
  }

  void lex_operator() {
    // Longest match first. '>'-prefixed operators are deliberately absent.
    static constexpr std::array<std::string_view, 38> ops = {
        "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "<<", "+=", "-=", "*=", "/=",
        "%=",  "&=",  "|=", "^=", "(",  ")",  "{",  "}",  "[",  "]",  ";",  ",",  ".",  "@",  "=",  "<",
        "!",   "~",   "?",  ":",  ">",  "+"};
    static constexpr std::array<std::string_view, 6> more = {"-", "*", "/", "&", "|", "^"};
    auto rest = src_.substr(pos_);
    for (auto op : ops) {
      if (rest.substr(0, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        return;
      }
    }
    for (auto op : more) {
      if (rest.substr(0, 1) == op) {
        advance();
        return;
      }
    }
    if (peek() == '%') {
      advance();
      return;
    }
    fail(std::string("unexpected character '") + peek() + "'");
  }
};

inline std::vector<Token> tokenize(std::string_view src) { return Lexer(src).tokenize(); }

}  // namespace astro::java
