#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cvm/runtime/runtime.hpp"

namespace cvm::demo {

// Impl names of the fixture components.
inline constexpr const char* kEcho = "EchoComponent";
inline constexpr const char* kClient = "Client";
inline constexpr const char* kEmitter = "Emitter";
inline constexpr const char* kReceiver = "Receiver";
inline constexpr const char* kForkHome = "DiningPhilosophers/ForkHome";

/// "EchoComponent": facet "in"; echo(x) -> x, stats() -> number of echo
/// calls so far. Init args: optional Int handler delay in milliseconds.
std::shared_ptr<ComponentImpl> echo_impl();
/// "Client": receptacle "out", no operations; a request source for tests.
std::shared_ptr<ComponentImpl> client_impl();
/// "Emitter": receptacle "out"; the A side of the demo.
std::shared_ptr<ComponentImpl> emitter_impl();
/// "Receiver": facet "in"; send(seq, payload-hex) records the message,
/// count() -> messages received.
std::shared_ptr<ComponentImpl> receiver_impl();
/// "DiningPhilosophers/ForkHome": facet "in"; create() -> "fork".
std::shared_ptr<ComponentImpl> fork_home_impl();

/// Registers every fixture impl that is not registered yet.
void register_demo_impls(Runtime& runtime);

struct ReceivedMessage {
  std::uint64_t seq = 0;
  std::string payload_hex;
};

// Receipt log of a Receiver, in arrival order.
class ReceiverLog {
 public:
  void record(std::uint64_t seq, std::string payload_hex);
  std::vector<ReceivedMessage> messages() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ReceivedMessage> messages_;
};

std::shared_ptr<ReceiverLog> receiver_log(Runtime& runtime, ComponentId receiver);

/// Plaintext A sends as message `seq`.
std::string plaintext_for(std::uint64_t seq);

// A emitting `count` sequenced messages to B every `interval`, from its own
// application thread.
class DemoApp : public Service {
 public:
  DemoApp(Runtime& runtime, ComponentId emitter, std::shared_ptr<ReceiverLog> log, std::chrono::milliseconds interval,
          std::uint64_t count);
  ~DemoApp() override;

  std::string_view service_name() const noexcept override { return name_; }
  void shutdown() override;

  void start();
  /// Blocks until every message was sent or the timeout expires.
  bool wait_done(std::chrono::milliseconds timeout);
  /// Blocks until B has received at least `n` messages.
  bool wait_received(std::size_t n, std::chrono::milliseconds timeout);

  std::uint64_t sent() const noexcept { return sent_.load(); }
  /// Sends that did not come back SUCCESSFUL.
  std::uint64_t failed() const noexcept { return failed_.load(); }
  std::vector<ReceivedMessage> received() const { return log_->messages(); }

 private:
  void run(std::stop_token stop);

  Runtime& runtime_;
  ComponentId emitter_;
  std::shared_ptr<ReceiverLog> log_;
  std::chrono::milliseconds interval_;
  std::uint64_t count_;
  std::string name_;
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> failed_{0};
  std::atomic<bool> done_{false};
  std::jthread thread_;
};

struct DemoTopology {
  ContainerId ca{};
  ContainerId cb{};
  ComponentId a{};
  ComponentId b{};
  std::shared_ptr<DemoApp> app;
};

/// Deploys CA{A} and CB{B}, connects A.out -> B.in and starts A. The app
/// is attached to the runtime as a service and stops with it.
DemoTopology deploy_demo(Runtime& runtime, std::chrono::milliseconds interval, std::uint64_t count,
                         bool start = true);

}  // namespace cvm::demo
