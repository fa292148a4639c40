#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "cvm/admin/frame.hpp"
#include "cvm/core/cvm.hpp"

namespace cvm::admin {

struct ServerConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = kDefaultAdminPort;  // 0 picks a free port
};

struct ServerStats {
  std::uint64_t sessions = 0;
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t errors = 0;  // ERROR frames sent
  std::uint64_t rejected = 0;  // connections closed for a bad header
};

/// Evaluates every form of the script at `path` on `cvm`; throws with the
/// first failing form (bootstrap scripts must run cleanly).
void run_bootstrap(core::Cvm& cvm, const std::filesystem::path& path);

/// Value of CVM_BOOTSTRAP, if set and non-empty.
std::optional<std::filesystem::path> bootstrap_path_from_env();

// TCP admin listener. Each connection is served by its own thread with
// strict request/reply alternation; forms from every session go through
// the node's single control queue.
class AdminServer {
 public:
  AdminServer(core::Cvm& cvm, ServerConfig config = {});
  ~AdminServer();
  AdminServer(const AdminServer&) = delete;
  AdminServer& operator=(const AdminServer&) = delete;

  /// Binds, starts the control loop if needed, and accepts in the
  /// background. Throws io when the address cannot be bound.
  void start();
  /// Closes the listener and every open session.
  void stop();

  std::uint16_t port() const noexcept { return port_.load(); }
  ServerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::uint16_t> port_{0};
};

}  // namespace cvm::admin
