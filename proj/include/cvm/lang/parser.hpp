#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "cvm/error.hpp"
#include "cvm/lang/ast.hpp"

namespace cvm::lang {

enum class ParseErrc {
  unexpected_close,
  unclosed_list,
  unterminated_string,
  invalid_escape,
  int_out_of_range,
  invalid_utf8,
  too_deep,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrc kind, std::size_t line, std::size_t column, const std::string& what);

  ParseErrc kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  /// Message without the location prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ParseErrc kind_;
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

inline constexpr std::size_t kMaxNestingDepth = 512;

// Grammar:
//   form    := list | string | atom
//   list    := '(' form* ')'
//   string  := '"' (char | '\"' | '\\')* '"'
//   atom    := int | float | symbol     ; int = [+-]?[0-9]+ ; float = [+-]?[0-9]*.[0-9]* with a digit
//   ';' to end of line is a comment. Lines and columns are 1-based.
Script parse(std::string_view source);

/// Parses exactly one form; trailing forms are an error.
AstNode parse_one(std::string_view source);

}  // namespace cvm::lang
