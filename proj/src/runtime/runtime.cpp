#include "cvm/runtime/runtime.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "cvm/lang/printer.hpp"

namespace cvm {

namespace {

// Instances whose call lock the current thread holds, innermost last.
thread_local std::vector<const ComponentInstance*> held_instances;

class HeldInstance {
 public:
  explicit HeldInstance(const ComponentInstance* inst) { held_instances.push_back(inst); }
  ~HeldInstance() { held_instances.pop_back(); }
  HeldInstance(const HeldInstance&) = delete;
  HeldInstance& operator=(const HeldInstance&) = delete;
};

std::string describe(const Connection& c) {
  return fmt::format("{}.{} -> {}.{}", raw(c.source.component), c.source.receptacle, raw(c.target.component),
                     c.target.facet);
}

}  // namespace

Runtime::Runtime() = default;

Runtime::~Runtime() { shutdown_services(); }

bool Runtime::register_impl(std::shared_ptr<ComponentImpl> impl) {
  std::unique_lock lock(registry_mutex_);
  const std::string name = impl->name();
  return impls_.emplace(name, std::move(impl)).second;
}

std::shared_ptr<ComponentImpl> Runtime::find_impl(std::string_view name) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = impls_.find(name);
  return it == impls_.end() ? nullptr : it->second;
}

std::vector<std::string> Runtime::impl_names() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> names;
  for (const auto& [name, impl] : impls_) names.push_back(name);
  return names;
}

std::uint32_t Runtime::replace_method(std::string_view impl_name, std::string_view operation, MethodBody body,
                                      std::string origin) {
  std::lock_guard control(control_mutex_);
  const auto impl = find_impl(impl_name);
  if (!impl) throw Error(Errc::unknown_implementation, fmt::format("unknown implementation: {}", impl_name));
  return impl->append_version(operation, std::move(body), std::move(origin));
}

std::vector<std::uint32_t> Runtime::method_versions(std::string_view impl_name, std::string_view operation) const {
  const auto impl = find_impl(impl_name);
  if (!impl) throw Error(Errc::unknown_implementation, fmt::format("unknown implementation: {}", impl_name));
  std::vector<std::uint32_t> out;
  for (const auto& v : impl->versions(operation)) out.push_back(v->version);
  return out;
}

ContainerId Runtime::create_container(std::string name) {
  std::lock_guard control(control_mutex_);
  const ContainerId id{next_id()};
  if (name.empty()) name = fmt::format("container#{}", raw(id));
  {
    std::unique_lock lock(registry_mutex_);
    containers_.emplace(id, Container{id, std::move(name), {}});
  }
  topology_version_.fetch_add(1);
  return id;
}

ComponentId Runtime::deploy_component(ContainerId container, std::string_view impl_name,
                                      std::span<const lang::Value> init_args, std::string name) {
  std::lock_guard control(control_mutex_);
  auto impl = find_impl(impl_name);
  if (!impl) throw Error(Errc::unknown_implementation, fmt::format("unknown implementation: {}", impl_name));
  if (!has_container(container)) {
    throw Error(Errc::unknown_container, fmt::format("unknown container: {}", raw(container)));
  }
  auto inst = std::make_shared<ComponentInstance>();
  inst->state = impl->make_state(init_args);
  inst->id = ComponentId{next_id()};
  inst->container = container;
  inst->name = name.empty() ? fmt::format("{}#{}", impl->name(), raw(inst->id)) : std::move(name);
  inst->impl = std::move(impl);
  const ComponentId id = inst->id;
  {
    std::unique_lock lock(registry_mutex_);
    containers_.at(container).components.push_back(id);
    components_.emplace(id, std::move(inst));
  }
  topology_version_.fetch_add(1);
  return id;
}

std::vector<Connection> Runtime::connections_touching(ComponentId id) const {
  std::vector<Connection> out;
  for (const auto& c : table_.load()->connections()) {
    if (c.source.component == id || c.target.component == id) out.push_back(c);
  }
  return out;
}

void Runtime::remove_component(ComponentId id) {
  std::lock_guard control(control_mutex_);
  if (!has_component(id)) throw Error(Errc::unknown_component, fmt::format("unknown component: {}", raw(id)));
  const auto dangling = connections_touching(id);
  if (!dangling.empty()) {
    std::string list;
    for (const auto& c : dangling) list += (list.empty() ? "" : ", ") + describe(c);
    throw Error(Errc::still_connected, fmt::format("component {} is still connected: {}", raw(id), list));
  }
  {
    std::unique_lock lock(registry_mutex_);
    const auto it = components_.find(id);
    auto& members = containers_.at(it->second->container).components;
    members.erase(std::remove(members.begin(), members.end(), id), members.end());
    components_.erase(it);
  }
  topology_version_.fetch_add(1);
}

bool Runtime::has_component(ComponentId id) const {
  std::shared_lock lock(registry_mutex_);
  return components_.count(id) != 0;
}

bool Runtime::has_container(ContainerId id) const {
  std::shared_lock lock(registry_mutex_);
  return containers_.count(id) != 0;
}

std::shared_ptr<ComponentInstance> Runtime::instance(ComponentId id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = components_.find(id);
  if (it == components_.end()) throw Error(Errc::unknown_component, fmt::format("unknown component: {}", raw(id)));
  return it->second;
}

namespace {
ComponentInfo info_of(const ComponentInstance& inst) {
  return ComponentInfo{inst.id,
                       inst.container,
                       inst.name,
                       inst.impl->name(),
                       {inst.impl->facets().begin(), inst.impl->facets().end()},
                       {inst.impl->receptacles().begin(), inst.impl->receptacles().end()}};
}
}  // namespace

std::optional<ComponentInfo> Runtime::component_info(ComponentId id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = components_.find(id);
  if (it == components_.end()) return std::nullopt;
  return info_of(*it->second);
}

std::vector<ComponentInfo> Runtime::components() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<ComponentInfo> out;
  for (const auto& [id, inst] : components_) out.push_back(info_of(*inst));
  return out;
}

ComponentId Runtime::find_component(std::string_view name) const {
  std::shared_lock lock(registry_mutex_);
  std::optional<ComponentId> found;
  for (const auto& [id, inst] : components_) {
    if (inst->name != name) continue;
    if (found) throw Error(Errc::precondition, fmt::format("component name '{}' is ambiguous", name));
    found = id;
  }
  if (!found) throw Error(Errc::unknown_component, fmt::format("no component named '{}'", name));
  return *found;
}

ContainerId Runtime::find_container(std::string_view name) const {
  std::shared_lock lock(registry_mutex_);
  std::optional<ContainerId> found;
  for (const auto& [id, c] : containers_) {
    if (c.name != name) continue;
    if (found) throw Error(Errc::precondition, fmt::format("container name '{}' is ambiguous", name));
    found = id;
  }
  if (!found) throw Error(Errc::unknown_container, fmt::format("no container named '{}'", name));
  return *found;
}

void Runtime::apply_action(ConnectionTable::Entries& entries, const RewireAction& action) const {
  const auto src = [&] {
    std::shared_lock lock(registry_mutex_);
    const auto it = components_.find(action.source.component);
    if (it == components_.end()) {
      throw Error(Errc::unknown_component, fmt::format("unknown component: {}", raw(action.source.component)));
    }
    return it->second;
  }();
  if (!src->impl->has_receptacle(action.source.receptacle)) {
    throw Error(Errc::unknown_port,
                fmt::format("{} has no receptacle '{}'", src->impl->name(), action.source.receptacle));
  }

  if (action.kind == RewireAction::Kind::disconnect) {
    if (entries.erase(action.source) == 0) {
      throw Error(Errc::unbound_receptacle, fmt::format("receptacle {}.{} is not connected",
                                                        raw(action.source.component), action.source.receptacle));
    }
    return;
  }

  const auto dst = [&] {
    std::shared_lock lock(registry_mutex_);
    const auto it = components_.find(action.target.component);
    if (it == components_.end()) {
      throw Error(Errc::unknown_component, fmt::format("unknown component: {}", raw(action.target.component)));
    }
    return it->second;
  }();
  if (!dst->impl->has_facet(action.target.facet)) {
    throw Error(Errc::unknown_port, fmt::format("{} has no facet '{}'", dst->impl->name(), action.target.facet));
  }
  if (entries.count(action.source) != 0) {
    throw Error(Errc::receptacle_bound, fmt::format("receptacle {}.{} is already bound",
                                                    raw(action.source.component), action.source.receptacle));
  }
  entries.emplace(action.source, ConnectionTarget{action.target, dst});
}

void Runtime::atomic_rewire(std::span<const RewireAction> actions) {
  std::lock_guard control(control_mutex_);
  if (actions.empty()) return;
  ConnectionTable::Entries next = table_.load()->entries();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    try {
      apply_action(next, actions[i]);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("rewire action #{}: {}", i + 1, e.what()));
    }
  }
  table_.store(std::make_shared<const ConnectionTable>(std::move(next)));
  topology_version_.fetch_add(1);
}

void Runtime::connect(ComponentId source, std::string_view receptacle, ComponentId target, std::string_view facet) {
  const RewireAction action =
      RewireAction::connect(source, std::string(receptacle), target, std::string(facet));
  try {
    atomic_rewire(std::span(&action, 1));
  } catch (const Error& e) {
    // Drop the "rewire action #1" prefix for single actions.
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    throw Error(e.code(), colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

void Runtime::disconnect(ComponentId source, std::string_view receptacle) {
  const RewireAction action = RewireAction::disconnect(source, std::string(receptacle));
  try {
    atomic_rewire(std::span(&action, 1));
  } catch (const Error& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    throw Error(e.code(), colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

Reply Runtime::send_request(ComponentId source, std::string_view receptacle, std::string operation,
                            std::vector<lang::Value> args) {
  const auto table = table_.load();
  const ConnectionTarget* target = table->find(source, receptacle);
  if (target == nullptr) {
    throw Error(Errc::unbound_receptacle,
                fmt::format("receptacle {}.{} is not connected", raw(source), receptacle));
  }
  return dispatch(source, target->instance, std::move(operation), std::move(args));
}

Reply Runtime::invoke_direct(ComponentId target, std::string operation, std::vector<lang::Value> args) {
  return dispatch(kControlSender, instance(target), std::move(operation), std::move(args));
}

Reply Runtime::dispatch(ComponentId sender, const std::shared_ptr<ComponentInstance>& target, std::string operation,
                        std::vector<lang::Value> args) {
  const auto chain = interceptors_.snapshot();
  const std::uint64_t request_id = next_request_id_.fetch_add(1) + 1;
  RequestInfo info(request_id, operation, &args, sender, target->id, target->impl->name());

  InterceptorChain::fire(*chain, InterceptionPoint::client_send_request, info);
  InterceptorChain::fire(*chain, InterceptionPoint::server_receive_request, info);

  Reply reply;
  reply.request_id = request_id;
  try {
    if (std::find(held_instances.begin(), held_instances.end(), target.get()) != held_instances.end()) {
      throw Error(Errc::precondition, fmt::format("re-entrant call into component {}", raw(target->id)));
    }
    std::lock_guard call_lock(target->call_mutex);
    HeldInstance held(target.get());
    const auto version = target->impl->active(operation);
    if (!version) {
      throw Error(Errc::unknown_operation,
                  fmt::format("{} has no operation '{}'", target->impl->name(), operation));
    }
    CallContext ctx(*this, *target, &info);
    reply.payload = version->body(ctx, args);
    reply.status = ReplyStatus::successful;
  } catch (const std::exception& e) {
    reply.status = ReplyStatus::exception;
    reply.error = e.what();
  } catch (...) {
    reply.status = ReplyStatus::exception;
    reply.error = "unknown exception";
  }
  info.set_reply(reply.status, reply.error);

  InterceptorChain::fire(*chain, InterceptionPoint::server_send_reply, info);
  InterceptorChain::fire(*chain, InterceptionPoint::client_receive_reply, info);
  reply.slots = info.slots();
  return reply;
}

void Runtime::attach_service(std::shared_ptr<Service> service) {
  std::lock_guard lock(services_mutex_);
  for (const auto& s : services_) {
    if (s->service_name() == service->service_name()) {
      throw Error(Errc::already_installed, fmt::format("service '{}' is already installed", s->service_name()));
    }
  }
  services_.push_back(std::move(service));
}

std::shared_ptr<Service> Runtime::find_service(std::string_view name) const {
  std::lock_guard lock(services_mutex_);
  for (const auto& s : services_) {
    if (s->service_name() == name) return s;
  }
  return nullptr;
}

bool Runtime::detach_service(std::string_view name) {
  std::shared_ptr<Service> victim;
  {
    std::lock_guard lock(services_mutex_);
    const auto it = std::find_if(services_.begin(), services_.end(),
                                 [&](const auto& s) { return s->service_name() == name; });
    if (it == services_.end()) return false;
    victim = *it;
    services_.erase(it);
  }
  victim->shutdown();
  return true;
}

void Runtime::shutdown_services() {
  std::vector<std::shared_ptr<Service>> victims;
  {
    std::lock_guard lock(services_mutex_);
    victims.swap(services_);
  }
  for (auto it = victims.rbegin(); it != victims.rend(); ++it) (*it)->shutdown();
}

Topology Runtime::topology() const {
  Topology topo;
  topo.version = topology_version_.load();
  {
    std::shared_lock lock(registry_mutex_);
    for (const auto& [id, c] : containers_) topo.containers.push_back(ContainerInfo{id, c.name, c.components});
    for (const auto& [id, inst] : components_) topo.components.push_back(info_of(*inst));
  }
  topo.connections = table_.load()->connections();
  return topo;
}

void Runtime::check_integrity() const {
  const auto table = table_.load();
  std::shared_lock lock(registry_mutex_);
  for (const auto& c : table->connections()) {
    if (components_.count(c.source.component) == 0 || components_.count(c.target.component) == 0) {
      throw Error(Errc::precondition, "dangling connection " + describe(c));
    }
  }
}

}  // namespace cvm
