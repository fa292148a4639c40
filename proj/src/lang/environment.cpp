#include "cvm/lang/environment.hpp"

#include "cvm/error.hpp"

namespace cvm::lang {

const Binding* Environment::find(std::string_view name) const {
  const auto it = bindings_.find(name);
  return it == bindings_.end() ? nullptr : &it->second;
}

const Binding& Environment::lookup(std::string_view name) const {
  if (const Binding* b = find(name)) return *b;
  throw Error(Errc::unbound_symbol, "unbound symbol: " + std::string(name));
}

void Environment::define(std::string name, Binding binding) {
  bindings_.insert_or_assign(std::move(name), std::move(binding));
}

void Environment::define_native(std::string name, NativeFn fn) {
  define(std::move(name), Native{std::move(fn)});
}

void Environment::define_special(std::string name, SpecialFn fn) {
  define(std::move(name), Special{std::move(fn)});
}

bool Environment::undefine(std::string_view name) {
  const auto it = bindings_.find(name);
  if (it == bindings_.end()) return false;
  bindings_.erase(it);
  return true;
}

std::vector<std::string> Environment::list_symbols() const {
  std::vector<std::string> names;
  names.reserve(bindings_.size());
  for (const auto& [name, binding] : bindings_) names.push_back(name);
  return names;
}

}  // namespace cvm::lang
