#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "cvm/admin/frame.hpp"
#include "cvm/core/cvm.hpp"

namespace cvm::admin {

struct GatewayConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = kDefaultGatewayPort;  // 0 picks a free port
  /// How often /api/events checks for topology and metric changes.
  std::chrono::milliseconds event_poll{100};
};

// JSON bodies served by the gateway. Field names are documented in
// docs/api.md.
std::string topology_json(const Runtime& rt);
std::string metrics_json(const Runtime& rt);
std::string symbols_json(const core::Cvm& cvm);
/// 200 body for a submitted script, or 400 body when it does not parse.
struct ScriptResponse {
  int status = 200;
  std::string body;
};
ScriptResponse run_script_json(core::Cvm& cvm, const std::string& source, bool keep_going);

// Read + submit HTTP front end for the operator console.
class Gateway {
 public:
  Gateway(core::Cvm& cvm, GatewayConfig config = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Throws io when the address cannot be bound.
  void start();
  void stop();
  std::uint16_t port() const noexcept { return port_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::uint16_t> port_{0};
};

}  // namespace cvm::admin
