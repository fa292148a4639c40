#include "cvm/interceptors/interceptors.hpp"

#include <algorithm>
#include <atomic>

namespace cvm {

namespace {
std::atomic<std::uint64_t> failed_callbacks{0};
}

const char* to_string(InterceptionPoint p) noexcept {
  switch (p) {
    case InterceptionPoint::client_send_request: return "ClientSendRequest";
    case InterceptionPoint::server_receive_request: return "ServerReceiveRequest";
    case InterceptionPoint::server_send_reply: return "ServerSendReply";
    case InterceptionPoint::client_receive_reply: return "ClientReceiveReply";
  }
  return "?";
}

std::string RequestInfo::arguments() const {
  if (args_ == nullptr) return "()";
  return lang::print_value(lang::Value::list(*args_));
}

std::optional<Bytes> RequestInfo::slot_get(SlotId id) const {
  const auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t InterceptorChain::register_interceptor(PointSet points, InterceptorCallback callback) {
  std::lock_guard lock(write_mutex_);
  auto next = std::make_shared<Snapshot>(*current_.load());
  const std::uint64_t id = next_id_++;
  next->push_back(InterceptorRegistration{id, points, std::move(callback)});
  current_.store(std::move(next));
  return id;
}

bool InterceptorChain::unregister_interceptor(std::uint64_t registration_id) {
  std::lock_guard lock(write_mutex_);
  auto next = std::make_shared<Snapshot>(*current_.load());
  const auto it = std::find_if(next->begin(), next->end(),
                               [&](const InterceptorRegistration& r) { return r.id == registration_id; });
  if (it == next->end()) return false;
  next->erase(it);
  current_.store(std::move(next));
  return true;
}

void InterceptorChain::fire(const Snapshot& chain, InterceptionPoint point, RequestInfo& info) {
  for (const auto& reg : chain) {
    if (!reg.points.contains(point)) continue;
    try {
      reg.callback(point, info);
    } catch (...) {
      failed_callbacks.fetch_add(1, std::memory_order_relaxed);
    }
  }
}

std::uint64_t InterceptorChain::callback_failures() noexcept { return failed_callbacks.load(); }

}  // namespace cvm
