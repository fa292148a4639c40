#include "cvm/lang/ast.hpp"

#include <bit>

namespace cvm::lang {

bool operator==(const AstNode& a, const AstNode& b) noexcept {
  if (a.v_.index() != b.v_.index()) return false;
  switch (a.v_.index()) {
    case 0: return a.symbol_name() == b.symbol_name();
    case 1: return a.str_value() == b.str_value();
    case 2: return a.int_value() == b.int_value();
    case 3:
      return std::bit_cast<std::uint64_t>(a.float_value()) ==
             std::bit_cast<std::uint64_t>(b.float_value());
    default: return a.children() == b.children();
  }
}

bool is_valid_symbol_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  for (char c : name) {
    switch (c) {
      case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
      case '(': case ')': case '"': case ';':
        return false;
      default:
        break;
    }
  }
  return true;
}

}  // namespace cvm::lang
