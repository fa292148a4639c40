#include "cvm/runtime/component.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "cvm/runtime/runtime.hpp"

namespace cvm {

ComponentId CallContext::self() const noexcept { return self_.id; }

const std::string& CallContext::impl_name() const noexcept { return self_.impl->name(); }

std::any& CallContext::raw_state() noexcept { return self_.state; }

Reply CallContext::send(std::string_view receptacle, std::string operation, std::vector<lang::Value> args) {
  return runtime_.send_request(self_.id, receptacle, std::move(operation), std::move(args));
}

lang::Value CallContext::call_own(std::string_view operation, std::vector<lang::Value> args) {
  const auto version = self_.impl->active(operation);
  if (!version) {
    throw Error(Errc::unknown_operation, fmt::format("{} has no operation '{}'", self_.impl->name(), operation));
  }
  return version->body(*this, args);
}

ComponentImpl::ComponentImpl(std::string name) : name_(std::move(name)) {}

ComponentImpl& ComponentImpl::facet(std::string port) {
  facets_.insert(std::move(port));
  return *this;
}

ComponentImpl& ComponentImpl::receptacle(std::string port) {
  receptacles_.insert(std::move(port));
  return *this;
}

ComponentImpl& ComponentImpl::operation(std::string op, MethodBody body, std::string origin) {
  auto first = std::make_shared<const MethodVersion>(MethodVersion{1, std::move(body), std::move(origin)});
  ops_.insert_or_assign(std::move(op), std::make_unique<OperationSlot>(std::move(first)));
  return *this;
}

ComponentImpl& ComponentImpl::state_factory(StateFactory factory) {
  state_factory_ = std::move(factory);
  return *this;
}

std::vector<std::string> ComponentImpl::operation_names() const {
  std::vector<std::string> names;
  for (const auto& [name, slot] : ops_) names.push_back(name);
  return names;
}

const ComponentImpl::OperationSlot& ComponentImpl::slot(std::string_view op) const {
  const auto it = ops_.find(op);
  if (it == ops_.end()) throw Error(Errc::unknown_operation, fmt::format("{} has no operation '{}'", name_, op));
  return *it->second;
}

std::shared_ptr<const MethodVersion> ComponentImpl::active(std::string_view op) const {
  const auto it = ops_.find(op);
  if (it == ops_.end()) return nullptr;
  return it->second->active.load();
}

std::uint32_t ComponentImpl::append_version(std::string_view op, MethodBody body, std::string origin) {
  const auto it = ops_.find(op);
  if (it == ops_.end()) throw Error(Errc::unknown_operation, fmt::format("{} has no operation '{}'", name_, op));
  OperationSlot& s = *it->second;
  std::lock_guard lock(s.mutex);
  const std::uint32_t next = s.history.back()->version + 1;
  auto version = std::make_shared<const MethodVersion>(MethodVersion{next, std::move(body), std::move(origin)});
  s.history.push_back(version);
  s.active.store(std::move(version));
  return next;
}

std::vector<std::shared_ptr<const MethodVersion>> ComponentImpl::versions(std::string_view op) const {
  const auto& s = slot(op);
  std::lock_guard lock(s.mutex);
  return s.history;
}

std::any ComponentImpl::make_state(std::span<const lang::Value> init_args) const {
  if (!state_factory_) return {};
  return state_factory_(init_args);
}

const ConnectionTarget* ConnectionTable::find(ComponentId source, std::string_view receptacle) const {
  // Heterogeneous lookup would need a transparent comparator over a pair;
  // the key is small so a temporary is fine.
  const auto it = entries_.find(ReceptacleRef{source, std::string(receptacle)});
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Connection> ConnectionTable::connections() const {
  std::vector<Connection> out;
  out.reserve(entries_.size());
  for (const auto& [source, target] : entries_) out.push_back(Connection{source, target.target});
  return out;
}

}  // namespace cvm
