#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cvm/lang/ast.hpp"
#include "cvm/lang/value.hpp"

namespace cvm::lang {

class Environment;

/// Host operation. Receives already-evaluated arguments and validates its
/// own arity.
using NativeFn = std::function<Value(Environment& env, std::span<const Value> args)>;

/// Special form: receives its operands unevaluated.
using SpecialFn = std::function<Value(Environment& env, std::span<const AstNode> operands)>;

struct Native {
  NativeFn fn;
};

struct Special {
  SpecialFn fn;
};

struct Proc {
  std::vector<std::string> params;
  std::vector<AstNode> body;
};

using Binding = std::variant<Value, Native, Special, Proc>;

// Mutable symbol table. Extending the language means defining new names,
// restricting it means undefining them; special forms are ordinary
// bindings, so keywords can be removed the same way as natives.
class Environment {
 public:
  Environment() = default;
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;
  Environment(Environment&&) = default;
  Environment& operator=(Environment&&) = default;

  /// nullptr when unbound.
  const Binding* find(std::string_view name) const;

  /// Throws Error(Errc::unbound_symbol) when unbound.
  const Binding& lookup(std::string_view name) const;

  void define(std::string name, Binding binding);
  /// Replaces any existing binding of the same name.
  void define_native(std::string name, NativeFn fn);
  void define_special(std::string name, SpecialFn fn);
  /// Returns whether the name was bound.
  bool undefine(std::string_view name);

  std::vector<std::string> list_symbols() const;
  std::size_t size() const noexcept { return bindings_.size(); }

 private:
  std::map<std::string, Binding, std::less<>> bindings_;
};

}  // namespace cvm::lang
