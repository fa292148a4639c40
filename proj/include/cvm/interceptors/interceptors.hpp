#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvm/lang/value.hpp"
#include "cvm/runtime/ids.hpp"
#include "cvm/util/bytes.hpp"
#include "cvm/util/snapshot.hpp"

namespace cvm {

enum class InterceptionPoint : std::uint8_t {
  client_send_request = 0,
  server_receive_request = 1,
  server_send_reply = 2,
  client_receive_reply = 3,
};

const char* to_string(InterceptionPoint p) noexcept;

// Bit set over the four interception points.
class PointSet {
 public:
  constexpr PointSet() = default;
  constexpr PointSet(std::initializer_list<InterceptionPoint> points) {
    for (auto p : points) bits_ |= bit(p);
  }
  static constexpr PointSet all() {
    return {InterceptionPoint::client_send_request, InterceptionPoint::server_receive_request,
            InterceptionPoint::server_send_reply, InterceptionPoint::client_receive_reply};
  }
  constexpr bool contains(InterceptionPoint p) const noexcept { return (bits_ & bit(p)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr PointSet with(InterceptionPoint p) const noexcept {
    PointSet s = *this;
    s.bits_ |= bit(p);
    return s;
  }

 private:
  static constexpr std::uint8_t bit(InterceptionPoint p) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
  }
  std::uint8_t bits_ = 0;
};

using SlotId = std::uint16_t;

/// Slot used by the monitoring service for its receive timestamp.
inline constexpr SlotId kTimestampSlot = 1;

// What an interceptor may see about one request. Confined to that request's
// traversal; slots written at one point are visible at the later ones.
class RequestInfo {
 public:
  RequestInfo(std::uint64_t request_id, std::string operation, const std::vector<lang::Value>* args,
              ComponentId sender, ComponentId target, std::string target_impl)
      : request_id_(request_id),
        operation_(std::move(operation)),
        args_(args),
        sender_(sender),
        target_(target),
        target_impl_(std::move(target_impl)) {}

  std::uint64_t request_id() const noexcept { return request_id_; }
  const std::string& operation() const noexcept { return operation_; }
  ComponentId sender() const noexcept { return sender_; }
  ComponentId target_component() const noexcept { return target_; }
  const std::string& target_impl() const noexcept { return target_impl_; }
  /// IDL:<impl>:1.0
  std::string target_interface() const { return "IDL:" + target_impl_ + ":1.0"; }
  bool response_expected() const noexcept { return true; }
  ReplyStatus reply_status() const noexcept { return status_; }
  /// Printed argument list, read-only, e.g. `("ping" 3)`.
  std::string arguments() const;
  /// Error text of an EXCEPTION reply, empty otherwise.
  const std::string& exception_text() const noexcept { return exception_; }

  void slot_set(SlotId id, Bytes bytes) { slots_.insert_or_assign(id, std::move(bytes)); }
  std::optional<Bytes> slot_get(SlotId id) const;
  const std::map<SlotId, Bytes>& slots() const noexcept { return slots_; }

  void set_reply(ReplyStatus status, std::string exception = {}) {
    status_ = status;
    exception_ = std::move(exception);
  }

 private:
  std::uint64_t request_id_;
  std::string operation_;
  const std::vector<lang::Value>* args_;
  ComponentId sender_;
  ComponentId target_;
  std::string target_impl_;
  ReplyStatus status_ = ReplyStatus::pending;
  std::string exception_;
  std::map<SlotId, Bytes> slots_;
};

using InterceptorCallback = std::function<void(InterceptionPoint, RequestInfo&)>;

struct InterceptorRegistration {
  std::uint64_t id = 0;
  PointSet points;
  InterceptorCallback callback;
};

// Node-global interceptor chains. The per-point order is registration
// order. Each request captures one snapshot of the registrations when it
// starts, so (un)registration only affects requests started afterwards.
class InterceptorChain {
 public:
  using Snapshot = std::vector<InterceptorRegistration>;

  std::uint64_t register_interceptor(PointSet points, InterceptorCallback callback);
  bool unregister_interceptor(std::uint64_t registration_id);

  std::shared_ptr<const Snapshot> snapshot() const { return current_.load(); }
  std::size_t size() const { return snapshot()->size(); }

  /// Runs every callback registered at `point`. Callbacks observe only;
  /// an exception thrown by one is counted and swallowed.
  static void fire(const Snapshot& chain, InterceptionPoint point, RequestInfo& info);

  static std::uint64_t callback_failures() noexcept;

 private:
  std::mutex write_mutex_;
  std::uint64_t next_id_ = 1;
  SnapshotCell<Snapshot> current_;
};

}  // namespace cvm
