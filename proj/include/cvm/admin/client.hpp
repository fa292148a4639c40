#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cvm/admin/frame.hpp"
#include "cvm/lang/parser.hpp"

namespace cvm::admin {

struct Target {
  std::string host;
  std::uint16_t port = kDefaultAdminPort;

  std::string str() const { return host + ":" + std::to_string(port); }
  bool operator==(const Target&) const = default;
};

/// "host:port" or "host" (default port). Throws Error(Errc::type).
Target parse_target(std::string_view text);
/// Comma-separated list of targets.
std::vector<Target> parse_targets(std::string_view text);

// Reply to one EVAL.
struct RemoteOutcome {
  std::size_t index = 0;
  bool ok = false;
  Bytes payload;       // RESULT payload (encoded AST) when ok
  std::string text;    // printed RESULT when ok, ERROR text otherwise

  lang::AstNode result() const;
};

// Blocking client for the admin protocol. Every outbound frame is checked
// with validate_frame before it is written.
class AdminClient {
 public:
  /// Throws connection_refused when nothing listens at the target.
  static AdminClient connect(const Target& target);

  AdminClient(AdminClient&&) noexcept;
  AdminClient& operator=(AdminClient&&) noexcept;
  ~AdminClient();

  RemoteOutcome eval(const lang::AstNode& form, std::size_t index = 0);
  /// Sends forms in order; stops after the first ERROR unless keep_going.
  std::vector<RemoteOutcome> submit(const lang::Script& script, bool keep_going = false);
  /// Round trip time of one PING/PONG.
  std::chrono::microseconds ping();
  /// Sends BYE and closes. Safe to call twice.
  void bye();

  /// Low level: write one frame, read one frame.
  void send(const Frame& frame);
  Frame receive();

  const Target& target() const noexcept { return target_; }
  bool connected() const noexcept;

 private:
  struct Impl;
  explicit AdminClient(std::unique_ptr<Impl> impl, Target target);
  std::unique_ptr<Impl> impl_;
  Target target_;
};

}  // namespace cvm::admin
