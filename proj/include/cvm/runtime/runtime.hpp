#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvm/interceptors/interceptors.hpp"
#include "cvm/runtime/component.hpp"
#include "cvm/runtime/connection_table.hpp"
#include "cvm/runtime/ids.hpp"
#include "cvm/util/snapshot.hpp"

namespace cvm {

// Long-lived node facility (monitoring, demo traffic...) owned by the
// runtime and shut down before it.
class Service {
 public:
  virtual ~Service() = default;
  virtual std::string_view service_name() const noexcept = 0;
  virtual void shutdown() = 0;
};

struct ComponentInfo {
  ComponentId id{};
  ContainerId container{};
  std::string name;
  std::string impl;
  std::vector<std::string> facets;
  std::vector<std::string> receptacles;
};

struct ContainerInfo {
  ContainerId id{};
  std::string name;
  std::vector<ComponentId> components;
};

struct Topology {
  std::vector<ContainerInfo> containers;
  std::vector<ComponentInfo> components;
  std::vector<Connection> connections;
  std::uint64_t version = 0;
};

// In-process component middleware for one node.
//
// Mutations (deploy, connect, rewire, replace_method, ...) are serialized
// internally and are expected to come from the single control context.
// send_request may be called from any number of application threads: it
// reads one immutable connection-table snapshot per request, so a rewire
// is observed either entirely or not at all.
class Runtime {
 public:
  Runtime();
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Node-wide id source; ids are never reused.
  std::uint64_t next_id() noexcept { return next_id_.fetch_add(1) + 1; }

  // -- implementations ---------------------------------------------------
  /// Registers an impl; returns false (and keeps the existing one) when the
  /// name is taken.
  bool register_impl(std::shared_ptr<ComponentImpl> impl);
  std::shared_ptr<ComponentImpl> find_impl(std::string_view name) const;
  std::vector<std::string> impl_names() const;

  /// Appends a method version; calls dispatched afterwards use it, calls
  /// already running finish on the version they started with.
  std::uint32_t replace_method(std::string_view impl, std::string_view operation, MethodBody body,
                               std::string origin = "replacement");
  std::vector<std::uint32_t> method_versions(std::string_view impl, std::string_view operation) const;

  // -- registry ----------------------------------------------------------
  ContainerId create_container(std::string name = {});
  ComponentId deploy_component(ContainerId container, std::string_view impl_name,
                               std::span<const lang::Value> init_args = {}, std::string name = {});
  void remove_component(ComponentId id);

  bool has_component(ComponentId id) const;
  bool has_container(ContainerId id) const;
  std::optional<ComponentInfo> component_info(ComponentId id) const;
  std::vector<ComponentInfo> components() const;
  /// Throws unknown_component when absent, precondition when ambiguous.
  ComponentId find_component(std::string_view name) const;
  ContainerId find_container(std::string_view name) const;

  // -- wiring ------------------------------------------------------------
  void connect(ComponentId source, std::string_view receptacle, ComponentId target, std::string_view facet);
  void disconnect(ComponentId source, std::string_view receptacle);
  /// Validates the whole list against the current table, then publishes the
  /// result in one swap. Nothing is applied when any action is invalid.
  void atomic_rewire(std::span<const RewireAction> actions);
  std::shared_ptr<const ConnectionTable> connections() const { return table_.load(); }

  // -- requests ----------------------------------------------------------
  /// Throws unbound_receptacle when the receptacle is not connected; target
  /// failures come back as an EXCEPTION reply.
  Reply send_request(ComponentId source, std::string_view receptacle, std::string operation,
                     std::vector<lang::Value> args);
  /// Request from the control context straight to a component.
  Reply invoke_direct(ComponentId target, std::string operation, std::vector<lang::Value> args);

  /// Runs `fn(std::any& state)` with the component's call lock held, so it
  /// never overlaps an operation on that instance.
  template <typename F>
  decltype(auto) inspect_state(ComponentId id, F&& fn) const {
    const auto inst = instance(id);
    std::lock_guard lock(inst->call_mutex);
    return std::forward<F>(fn)(inst->state);
  }

  InterceptorChain& interceptors() noexcept { return interceptors_; }
  std::uint64_t requests_issued() const noexcept { return next_request_id_.load(); }

  // -- services ----------------------------------------------------------
  /// Throws already_installed when a service of the same name exists.
  void attach_service(std::shared_ptr<Service> service);
  std::shared_ptr<Service> find_service(std::string_view name) const;
  /// Shuts the service down and drops it; false when absent.
  bool detach_service(std::string_view name);

  template <typename T>
  std::shared_ptr<T> find_service_as(std::string_view name) const {
    return std::dynamic_pointer_cast<T>(find_service(name));
  }

  // -- introspection -----------------------------------------------------
  Topology topology() const;
  std::uint64_t topology_version() const noexcept { return topology_version_.load(); }
  /// Throws when a table endpoint refers to a component not in the registry.
  void check_integrity() const;

  /// Single-entry-point latch for the CVM bootstrap; true the first time.
  bool mark_bootstrapped() noexcept { return !bootstrapped_.exchange(true); }

  /// Stops every attached service (reverse attach order). Idempotent.
  void shutdown_services();

 private:
  struct Container {
    ContainerId id{};
    std::string name;
    std::vector<ComponentId> components;
  };

  Reply dispatch(ComponentId sender, const std::shared_ptr<ComponentInstance>& target, std::string operation,
                 std::vector<lang::Value> args);
  std::shared_ptr<ComponentInstance> instance(ComponentId id) const;
  void apply_action(ConnectionTable::Entries& entries, const RewireAction& action) const;
  std::vector<Connection> connections_touching(ComponentId id) const;

  std::atomic<std::uint64_t> next_id_{0};
  std::atomic<std::uint64_t> next_request_id_{0};
  std::atomic<std::uint64_t> topology_version_{0};
  std::atomic<bool> bootstrapped_{false};

  std::mutex control_mutex_;  // serializes mutations
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<ComponentImpl>, std::less<>> impls_;
  std::map<ContainerId, Container> containers_;
  std::map<ComponentId, std::shared_ptr<ComponentInstance>> components_;

  SnapshotCell<ConnectionTable> table_;
  InterceptorChain interceptors_;

  mutable std::mutex services_mutex_;
  std::vector<std::shared_ptr<Service>> services_;
};

}  // namespace cvm
