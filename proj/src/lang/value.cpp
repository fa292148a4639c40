#include "cvm/lang/value.hpp"

#include <bit>

#include "cvm/lang/printer.hpp"

namespace cvm::lang {

std::string_view to_string(HandleKind kind) noexcept {
  switch (kind) {
    case HandleKind::runtime: return "runtime";
    case HandleKind::container: return "container";
    case HandleKind::component: return "component";
    case HandleKind::service: return "service";
    case HandleKind::metric: return "metric";
    case HandleKind::interceptor: return "interceptor";
  }
  return "unknown";
}

bool Value::truthy() const noexcept {
  if (is_unit()) return false;
  if (is_bool()) return as_bool();
  return true;
}

bool operator==(const Value& a, const Value& b) noexcept {
  if (a.v_.index() != b.v_.index()) return false;
  if (a.is_float()) {
    return std::bit_cast<std::uint64_t>(a.as_float()) == std::bit_cast<std::uint64_t>(b.as_float());
  }
  return a.v_ == b.v_;
}

AstNode value_to_ast(const Value& value) {
  switch (value.variant().index()) {
    case 0: return AstNode::list();
    case 1: return AstNode::symbol(value.as_bool() ? "true" : "false");
    case 2: return AstNode::integer(value.as_int());
    case 3: return AstNode::floating(value.as_float());
    case 4: return AstNode::str(value.as_str());
    case 5: {
      const Handle& h = value.as_handle();
      return AstNode::list({AstNode::symbol("handle"), AstNode::integer(static_cast<std::int64_t>(h.kind)),
                            AstNode::integer(static_cast<std::int64_t>(h.id))});
    }
    default: {
      AstNode::List children;
      children.reserve(value.as_list().size());
      for (const auto& item : value.as_list()) children.push_back(value_to_ast(item));
      return AstNode::list(std::move(children));
    }
  }
}

std::string print_value(const Value& value) { return print(value_to_ast(value)); }

}  // namespace cvm::lang
