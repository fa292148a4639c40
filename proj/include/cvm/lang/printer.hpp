#pragma once

#include <string>

#include "cvm/lang/ast.hpp"

namespace cvm::lang {

// Canonical text: single spaces between list elements, strings re-escaped,
// floats in the shortest fixed notation that round-trips (always with a
// '.'). Non-finite floats print as the symbols nan / inf / -inf and do not
// re-parse as floats.
std::string print(const AstNode& node);

void print_to(std::string& out, const AstNode& node);

}  // namespace cvm::lang
