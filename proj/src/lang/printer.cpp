#include "cvm/lang/printer.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace cvm::lang {

namespace {

void print_float(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  if (std::isinf(v)) {
    out += v < 0 ? "-inf" : "inf";
    return;
  }
  // Fixed notation of DBL_MAX is 309 digits; leave headroom for subnormals.
  std::array<char, 400> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
  std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
  out += text;
  if (text.find('.') == std::string_view::npos) out += ".0";
}

}  // namespace

void print_to(std::string& out, const AstNode& node) {
  switch (node.variant().index()) {
    case 0:
      out += node.symbol_name();
      break;
    case 1:
      out.push_back('"');
      for (char c : node.str_value()) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out.push_back('"');
      break;
    case 2: {
      std::array<char, 24> buf{};
      const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), node.int_value());
      out.append(buf.data(), end);
      break;
    }
    case 3:
      print_float(out, node.float_value());
      break;
    default: {
      out.push_back('(');
      bool first = true;
      for (const auto& child : node.children()) {
        if (!first) out.push_back(' ');
        first = false;
        print_to(out, child);
      }
      out.push_back(')');
      break;
    }
  }
}

std::string print(const AstNode& node) {
  std::string out;
  print_to(out, node);
  return out;
}

}  // namespace cvm::lang
