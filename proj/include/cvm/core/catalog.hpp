#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cvm/runtime/component.hpp"

namespace cvm::core {

// Ordered, duplicate-free list of plugin locations. Locations are recorded
// for diagnostics only; implementations come from the compiled-in catalog.
class PluginSearchPath {
 public:
  /// False when the location was already listed.
  bool add(std::string location);
  const std::vector<std::string>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::string> entries_;
};

using ImplFactory = std::function<std::shared_ptr<ComponentImpl>()>;

// Implementations `load_impl` can make deployable.
class ImplCatalog {
 public:
  /// Catalog holding the demo fixtures and CryptoCOS.
  static ImplCatalog builtin();

  /// Replaces an existing entry of the same name.
  void add(std::string name, ImplFactory factory);
  const ImplFactory* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ImplFactory, std::less<>> factories_;
};

}  // namespace cvm::core
