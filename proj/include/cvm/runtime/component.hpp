#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvm/error.hpp"
#include "cvm/interceptors/interceptors.hpp"
#include "cvm/lang/value.hpp"
#include "cvm/runtime/ids.hpp"
#include "cvm/util/snapshot.hpp"

namespace cvm {

class Runtime;
struct ComponentInstance;

struct Reply {
  std::uint64_t request_id = 0;
  ReplyStatus status = ReplyStatus::pending;
  lang::Value payload;  // SUCCESSFUL
  std::string error;    // EXCEPTION
  std::map<SlotId, Bytes> slots;

  bool ok() const noexcept { return status == ReplyStatus::successful; }
};

// Handed to an operation body for the duration of one call. The body has
// exclusive access to its instance state.
class CallContext {
 public:
  CallContext(Runtime& runtime, ComponentInstance& self, const RequestInfo* request)
      : runtime_(runtime), self_(self), request_(request) {}

  Runtime& runtime() noexcept { return runtime_; }
  ComponentId self() const noexcept;
  const std::string& impl_name() const noexcept;
  /// nullptr for calls that did not come through a request.
  const RequestInfo* request() const noexcept { return request_; }

  std::any& raw_state() noexcept;

  template <typename T>
  T& state() {
    if (T* p = std::any_cast<T>(&raw_state())) return *p;
    throw Error(Errc::type, "component state has an unexpected type");
  }

  /// Sends a request through one of this component's receptacles.
  Reply send(std::string_view receptacle, std::string operation, std::vector<lang::Value> args);

  /// Runs the active version of one of this component's own operations
  /// directly, without a request or interception.
  lang::Value call_own(std::string_view operation, std::vector<lang::Value> args);

 private:
  Runtime& runtime_;
  ComponentInstance& self_;
  const RequestInfo* request_;
};

using MethodBody = std::function<lang::Value(CallContext&, std::span<const lang::Value>)>;
using StateFactory = std::function<std::any(std::span<const lang::Value> init_args)>;

struct MethodVersion {
  std::uint32_t version = 0;
  MethodBody body;
  std::string origin;
};

// A component implementation: declared ports plus, per operation, an
// append-only list of method versions. The highest version is the active
// one; older versions stay listed.
//
// Ports and operations are declared before the impl is registered with a
// runtime; afterwards only new versions may be appended.
class ComponentImpl {
 public:
  explicit ComponentImpl(std::string name);
  ComponentImpl(const ComponentImpl&) = delete;
  ComponentImpl& operator=(const ComponentImpl&) = delete;

  const std::string& name() const noexcept { return name_; }

  ComponentImpl& facet(std::string port);
  ComponentImpl& receptacle(std::string port);
  ComponentImpl& operation(std::string op, MethodBody body, std::string origin = "builtin");
  ComponentImpl& state_factory(StateFactory factory);

  const std::set<std::string, std::less<>>& facets() const noexcept { return facets_; }
  const std::set<std::string, std::less<>>& receptacles() const noexcept { return receptacles_; }
  bool has_facet(std::string_view port) const { return facets_.count(port) != 0; }
  bool has_receptacle(std::string_view port) const { return receptacles_.count(port) != 0; }

  bool has_operation(std::string_view op) const { return ops_.count(op) != 0; }
  std::vector<std::string> operation_names() const;

  /// nullptr when the operation does not exist.
  std::shared_ptr<const MethodVersion> active(std::string_view op) const;

  /// Appends a version and makes it active; returns its number.
  std::uint32_t append_version(std::string_view op, MethodBody body, std::string origin);

  std::vector<std::shared_ptr<const MethodVersion>> versions(std::string_view op) const;

  std::any make_state(std::span<const lang::Value> init_args) const;

 private:
  struct OperationSlot {
    explicit OperationSlot(std::shared_ptr<const MethodVersion> first)
        : history{first}, active(std::move(first)) {}
    mutable std::mutex mutex;
    std::vector<std::shared_ptr<const MethodVersion>> history;
    SnapshotCell<MethodVersion> active;
  };

  const OperationSlot& slot(std::string_view op) const;

  std::string name_;
  std::set<std::string, std::less<>> facets_;
  std::set<std::string, std::less<>> receptacles_;
  std::map<std::string, std::unique_ptr<OperationSlot>, std::less<>> ops_;
  StateFactory state_factory_;
};

struct ComponentInstance {
  ComponentId id{};
  ContainerId container{};
  std::string name;
  std::shared_ptr<ComponentImpl> impl;
  std::mutex call_mutex;
  std::any state;
};

}  // namespace cvm
