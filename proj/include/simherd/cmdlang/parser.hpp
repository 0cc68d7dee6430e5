#pragma once

// Recursive-descent parser for the command/reporter subset:
//
//   command  := "set" IDENT expr | "setup" | "go" | "stop"
//             | "repeat" NUMBER "[" command* "]" | "random-seed" NUMBER
//   expr     := NUMBER | STRING | "true" | "false" | "random" NUMBER
//   reporter := "ticks" | "count" IDENT | "not" "any?" "turtles" | IDENT
//
// Identifiers are case-folded to lowercase and may contain '-', '_', '?', '!'.
// Any other NetLogo construct is rejected with a positioned ParseError.

#include <simherd/cmdlang/ast.hpp>
#include <simherd/error.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace simherd::cmdlang {

class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string token, const std::string& detail)
      : Error(ErrorKind::parse, "at " + std::to_string(position) + " near '" + token + "': " + detail),
        position_(position),
        token_(std::move(token)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t position_;
  std::string token_;
};

namespace detail {

enum class TokenType { identifier, number, string, open_bracket, close_bracket, end };

struct Token {
  TokenType type = TokenType::end;
  std::string text;  // identifiers folded; strings unescaped
  double number = 0;
  std::size_t position = 0;
};

inline constexpr std::size_t kMaxNesting = 64;
inline constexpr double kMaxExactInteger = 9007199254740992.0;  // 2^53

inline bool is_ident_start(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ident_char(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '?' || c == '!';
}
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline std::string excerpt(std::string_view text, std::size_t pos) {
  std::string out;
  for (std::size_t i = pos; i < text.size() && out.size() < 16; ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c) && !out.empty()) break;
    out.push_back(c >= 0x20 && c < 0x7f ? static_cast<char>(c) : '?');
  }
  return out;
}

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (true) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    const std::size_t start = i;
    const auto c = static_cast<unsigned char>(text[i]);
    Token token;
    token.position = start;
    if (c == '[' || c == ']') {
      token.type = c == '[' ? TokenType::open_bracket : TokenType::close_bracket;
      token.text = std::string(1, static_cast<char>(c));
      ++i;
    } else if (c == '"') {
      token.type = TokenType::string;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        const char ch = text[i++];
        if (ch == '"') {
          closed = true;
          break;
        }
        if (ch == '\\') {
          if (i >= text.size()) break;
          const char esc = text[i++];
          switch (esc) {
            case '"': token.text.push_back('"'); break;
            case '\\': token.text.push_back('\\'); break;
            case 'n': token.text.push_back('\n'); break;
            case 't': token.text.push_back('\t'); break;
            case 'r': token.text.push_back('\r'); break;
            default: throw ParseError(i - 2, excerpt(text, i - 2), "unknown escape sequence");
          }
        } else {
          token.text.push_back(ch);
        }
      }
      if (!closed) throw ParseError(start, excerpt(text, start), "unterminated string literal");
    } else if (is_digit(c) || c == '.' || (c == '-' && i + 1 < text.size() &&
                                            (is_digit(static_cast<unsigned char>(text[i + 1])) ||
                                             text[i + 1] == '.'))) {
      token.type = TokenType::number;
      std::size_t j = i + (c == '-' ? 1 : 0);
      while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && is_digit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      if (j < text.size() && is_ident_char(static_cast<unsigned char>(text[j]))) {
        throw ParseError(start, excerpt(text, start), "malformed number");
      }
      token.text = std::string(text.substr(i, j - i));
      const char* first = token.text.data();
      const char* last = first + token.text.size();
      const auto [ptr, ec] = std::from_chars(first, last, token.number);
      if (ec != std::errc() || ptr != last || !std::isfinite(token.number)) {
        throw ParseError(start, token.text, "malformed number");
      }
      i = j;
    } else if (is_ident_start(c)) {
      token.type = TokenType::identifier;
      while (i < text.size() && is_ident_char(static_cast<unsigned char>(text[i]))) {
        const auto ch = static_cast<unsigned char>(text[i++]);
        token.text.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : static_cast<char>(ch));
      }
    } else {
      throw ParseError(start, excerpt(text, start), "unexpected character");
    }
    tokens.push_back(std::move(token));
  }
  Token end;
  end.position = text.size();
  tokens.push_back(end);
  return tokens;
}

inline bool is_keyword(std::string_view word) {
  static constexpr std::array<std::string_view, 14> keywords{
      "set", "setup", "go", "stop", "repeat", "random-seed", "random",
      "ticks", "count", "not", "any?", "true", "false", "turtles"};
  for (auto k : keywords) {
    if (k == word) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Command parse_command_input() {
    auto command = parse_command(0);
    expect_end();
    return command;
  }

  Reporter parse_reporter_input() {
    auto reporter = parse_reporter();
    expect_end();
    return reporter;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Token& token, const std::string& detail) const {
    throw ParseError(token.position, token.type == TokenType::end ? "<end>" : token.text, detail);
  }

  void expect_end() {
    if (peek().type != TokenType::end) fail(peek(), "expected end of input");
  }

  // A non-negative (or any, when allow_negative) integral value; fractions truncate.
  long long expect_integer(const char* what, bool allow_negative, long long minimum) {
    const auto& token = advance();
    if (token.type != TokenType::number) fail(token, std::string("expected ") + what);
    const double truncated = std::trunc(token.number);
    if (std::fabs(truncated) > kMaxExactInteger) fail(token, std::string(what) + " out of range");
    const auto value = static_cast<long long>(truncated);
    if ((!allow_negative && value < 0) || value < minimum) {
      fail(token, std::string(what) + " must be at least " + std::to_string(minimum));
    }
    return value;
  }

  Command parse_command(std::size_t depth) {
    const auto& token = advance();
    if (token.type != TokenType::identifier) fail(token, "expected a command");
    const auto& word = token.text;
    if (word == "setup") return {Setup{}};
    if (word == "go") return {Go{}};
    if (word == "stop") return {Stop{}};
    if (word == "set") {
      const auto& name = advance();
      if (name.type != TokenType::identifier) fail(name, "expected a variable name");
      if (is_keyword(name.text)) fail(name, "cannot set reserved word");
      return {Set{name.text, parse_expr()}};
    }
    if (word == "random-seed") {
      return {RandomSeed{expect_integer("a seed", true, std::numeric_limits<long long>::min())}};
    }
    if (word == "repeat") {
      if (depth >= kMaxNesting) fail(token, "repeat nested too deeply");
      Repeat repeat;
      repeat.count = expect_integer("a repeat count", false, 0);
      if (const auto& open = advance(); open.type != TokenType::open_bracket) fail(open, "expected '['");
      while (peek().type != TokenType::close_bracket) {
        if (peek().type == TokenType::end) fail(peek(), "expected ']'");
        repeat.body.push_back(parse_command(depth + 1));
      }
      advance();
      return {std::move(repeat)};
    }
    fail(token, "unsupported NetLogo construct");
  }

  Expr parse_expr() {
    const auto& token = advance();
    switch (token.type) {
      case TokenType::number: return NumberLiteral{token.number};
      case TokenType::string: return StringLiteral{token.text};
      case TokenType::identifier:
        if (token.text == "true") return BooleanLiteral{true};
        if (token.text == "false") return BooleanLiteral{false};
        if (token.text == "random") return Random{expect_integer("a random bound", false, 1)};
        fail(token, "unsupported NetLogo construct");
      default: fail(token, "expected a value");
    }
  }

  Reporter parse_reporter() {
    const auto& token = advance();
    if (token.type != TokenType::identifier) fail(token, "expected a reporter");
    const auto& word = token.text;
    if (word == "ticks") return Ticks{};
    if (word == "count") {
      const auto& breed = advance();
      if (breed.type != TokenType::identifier || (is_keyword(breed.text) && breed.text != "turtles")) {
        fail(breed, "expected a breed name");
      }
      return Count{breed.text};
    }
    if (word == "not") {
      const auto& any = advance();
      if (any.type != TokenType::identifier || any.text != "any?") fail(any, "unsupported NetLogo construct");
      const auto& what = advance();
      if (what.type != TokenType::identifier || what.text != "turtles") {
        fail(what, "unsupported NetLogo construct");
      }
      return NotAnyTurtles{};
    }
    if (is_keyword(word)) fail(token, "unsupported NetLogo construct");
    return NamedReporter{word};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Command parse_command(std::string_view text) { return detail::Parser(text).parse_command_input(); }

inline Reporter parse_reporter(std::string_view text) { return detail::Parser(text).parse_reporter_input(); }

}  // namespace simherd::cmdlang
