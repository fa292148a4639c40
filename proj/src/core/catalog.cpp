#include "cvm/core/catalog.hpp"

#include <algorithm>

#include "cvm/crypto/cos.hpp"
#include "cvm/demo/demo.hpp"

namespace cvm::core {

bool PluginSearchPath::add(std::string location) {
  if (std::find(entries_.begin(), entries_.end(), location) != entries_.end()) return false;
  entries_.push_back(std::move(location));
  return true;
}

ImplCatalog ImplCatalog::builtin() {
  ImplCatalog c;
  c.add(std::string(crypto::kCosImplName), crypto::cos_impl);
  c.add(demo::kEcho, demo::echo_impl);
  c.add(demo::kClient, demo::client_impl);
  c.add(demo::kEmitter, demo::emitter_impl);
  c.add(demo::kReceiver, demo::receiver_impl);
  c.add(demo::kForkHome, demo::fork_home_impl);
  return c;
}

void ImplCatalog::add(std::string name, ImplFactory factory) {
  factories_.insert_or_assign(std::move(name), std::move(factory));
}

const ImplFactory* ImplCatalog::find(std::string_view name) const {
  const auto it = factories_.find(name);
  return it == factories_.end() ? nullptr : &it->second;
}

std::vector<std::string> ImplCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [name, f] : factories_) out.push_back(name);
  return out;
}

}  // namespace cvm::core
