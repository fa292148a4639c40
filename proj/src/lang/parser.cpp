#include "cvm/lang/parser.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>

#include "cvm/util/bytes.hpp"

namespace cvm::lang {

ParseError::ParseError(ParseErrc kind, std::size_t line, std::size_t column, const std::string& what)
    : Error(Errc::parse, fmt::format("parse error at line {}, column {}: {}", line, column, what)),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(what) {}

namespace {

bool is_delimiter(char c) noexcept {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
    case '(': case ')': case '"': case ';':
      return true;
    default:
      return false;
  }
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

enum class Numeric { none, integer, floating };

Numeric classify(std::string_view tok) noexcept {
  std::size_t i = 0;
  if (!tok.empty() && (tok[0] == '+' || tok[0] == '-')) i = 1;
  bool digits = false;
  int dots = 0;
  for (; i < tok.size(); ++i) {
    if (is_digit(tok[i])) {
      digits = true;
    } else if (tok[i] == '.') {
      ++dots;
    } else {
      return Numeric::none;
    }
  }
  if (!digits || dots > 1) return Numeric::none;
  return dots == 0 ? Numeric::integer : Numeric::floating;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Script parse_all() {
    Script script;
    skip_space();
    while (pos_ < src_.size()) {
      script.forms.push_back(parse_form(0));
      skip_space();
    }
    return script;
  }

 private:
  [[noreturn]] void fail(ParseErrc kind, std::size_t line, std::size_t col, const std::string& msg) {
    throw ParseError(kind, line, col, msg);
  }

  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = peek();
      if (c == ';') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        advance();
      } else {
        break;
      }
    }
  }

  AstNode parse_form(std::size_t depth) {
    const char c = peek();
    if (c == '(') return parse_list(depth);
    if (c == ')') fail(ParseErrc::unexpected_close, line_, col_, "unexpected ')'");
    if (c == '"') return parse_string();
    return parse_atom();
  }

  AstNode parse_list(std::size_t depth) {
    const std::size_t open_line = line_;
    const std::size_t open_col = col_;
    if (depth >= kMaxNestingDepth) fail(ParseErrc::too_deep, line_, col_, "nesting too deep");
    advance();  // '('
    AstNode::List children;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) fail(ParseErrc::unclosed_list, open_line, open_col, "unclosed '('");
      if (peek() == ')') {
        advance();
        return AstNode::list(std::move(children));
      }
      children.push_back(parse_form(depth + 1));
    }
  }

  AstNode parse_string() {
    const std::size_t open_line = line_;
    const std::size_t open_col = col_;
    advance();  // '"'
    std::string out;
    for (;;) {
      if (pos_ >= src_.size()) {
        fail(ParseErrc::unterminated_string, open_line, open_col, "unterminated string");
      }
      const char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        const std::size_t esc_line = line_;
        const std::size_t esc_col = col_;
        advance();
        if (pos_ >= src_.size()) {
          fail(ParseErrc::unterminated_string, open_line, open_col, "unterminated string");
        }
        const char e = peek();
        if (e != '"' && e != '\\') {
          fail(ParseErrc::invalid_escape, esc_line, esc_col, fmt::format("invalid escape '\\{}'", e));
        }
        out.push_back(e);
        advance();
        continue;
      }
      out.push_back(c);
      advance();
    }
    if (!is_valid_utf8(out)) fail(ParseErrc::invalid_utf8, open_line, open_col, "invalid UTF-8 in string");
    return AstNode::str(std::move(out));
  }

  AstNode parse_atom() {
    const std::size_t tok_line = line_;
    const std::size_t tok_col = col_;
    const std::size_t start = pos_;
    while (pos_ < src_.size() && !is_delimiter(peek())) advance();
    const std::string_view tok = src_.substr(start, pos_ - start);
    switch (classify(tok)) {
      case Numeric::integer: {
        std::string_view digits = tok;
        if (digits[0] == '+') digits.remove_prefix(1);
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
          fail(ParseErrc::int_out_of_range, tok_line, tok_col,
               fmt::format("integer literal out of range: {}", tok));
        }
        return AstNode::integer(value);
      }
      case Numeric::floating: {
        std::string_view digits = tok;
        if (digits[0] == '+') digits.remove_prefix(1);
        double value = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value,
                                               std::chars_format::fixed);
        if (ec == std::errc::result_out_of_range) {
          // from_chars leaves the value untouched on underflow; strtod
          // still produces the nearest subnormal.
          const std::string copy(digits);
          value = std::strtod(copy.c_str(), nullptr);
          if (std::isinf(value)) {
            fail(ParseErrc::int_out_of_range, tok_line, tok_col,
                 fmt::format("float literal out of range: {}", tok));
          }
        } else if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
          fail(ParseErrc::int_out_of_range, tok_line, tok_col, fmt::format("bad float literal: {}", tok));
        }
        return AstNode::floating(value);
      }
      case Numeric::none:
        break;
    }
    if (!is_valid_utf8(tok)) fail(ParseErrc::invalid_utf8, tok_line, tok_col, "invalid UTF-8 in symbol");
    return AstNode::symbol(std::string(tok));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

Script parse(std::string_view source) { return Parser(source).parse_all(); }

AstNode parse_one(std::string_view source) {
  Script script = parse(source);
  if (script.forms.size() != 1) {
    throw Error(Errc::parse, fmt::format("expected exactly one form, found {}", script.forms.size()));
  }
  return std::move(script.forms.front());
}

}  // namespace cvm::lang
