#include "cvm/demo/demo.hpp"

#include <fmt/format.h>

#include "cvm/util/thread_label.hpp"

namespace cvm::demo {

namespace {

struct EchoState {
  std::chrono::milliseconds delay{0};
  std::int64_t echo_calls = 0;
};

}  // namespace

std::shared_ptr<ComponentImpl> echo_impl() {
  auto impl = std::make_shared<ComponentImpl>(kEcho);
  impl->facet("in");
  impl->state_factory([](std::span<const lang::Value> init) {
    EchoState s;
    if (!init.empty()) {
      if (!init[0].is_int() || init[0].as_int() < 0) throw Error(Errc::type, "EchoComponent: delay must be an Int >= 0");
      s.delay = std::chrono::milliseconds(init[0].as_int());
    }
    return std::any(s);
  });
  impl->operation("echo", [](CallContext& ctx, std::span<const lang::Value> args) {
    if (args.size() != 1) throw Error(Errc::arity, "echo expects 1 argument");
    auto& s = ctx.state<EchoState>();
    ++s.echo_calls;
    if (s.delay.count() > 0) std::this_thread::sleep_for(s.delay);
    return args[0];
  });
  impl->operation("stats", [](CallContext& ctx, std::span<const lang::Value>) {
    return lang::Value::integer(ctx.state<EchoState>().echo_calls);
  });
  return impl;
}

std::shared_ptr<ComponentImpl> client_impl() {
  auto impl = std::make_shared<ComponentImpl>(kClient);
  impl->receptacle("out");
  return impl;
}

std::shared_ptr<ComponentImpl> emitter_impl() {
  auto impl = std::make_shared<ComponentImpl>(kEmitter);
  impl->receptacle("out");
  return impl;
}

std::shared_ptr<ComponentImpl> receiver_impl() {
  auto impl = std::make_shared<ComponentImpl>(kReceiver);
  impl->facet("in");
  impl->state_factory([](std::span<const lang::Value>) { return std::any(std::make_shared<ReceiverLog>()); });
  impl->operation("send", [](CallContext& ctx, std::span<const lang::Value> args) {
    if (args.size() != 2 || !args[0].is_int() || !args[1].is_str()) {
      throw Error(Errc::arity, "send expects (seq payload-hex)");
    }
    ctx.state<std::shared_ptr<ReceiverLog>>()->record(static_cast<std::uint64_t>(args[0].as_int()),
                                                      args[1].as_str());
    return lang::Value::unit();
  });
  impl->operation("count", [](CallContext& ctx, std::span<const lang::Value>) {
    return lang::Value::integer(static_cast<std::int64_t>(ctx.state<std::shared_ptr<ReceiverLog>>()->size()));
  });
  return impl;
}

std::shared_ptr<ComponentImpl> fork_home_impl() {
  auto impl = std::make_shared<ComponentImpl>(kForkHome);
  impl->facet("in");
  impl->operation("create", [](CallContext&, std::span<const lang::Value>) { return lang::Value::str("fork"); });
  return impl;
}

void register_demo_impls(Runtime& runtime) {
  runtime.register_impl(echo_impl());
  runtime.register_impl(client_impl());
  runtime.register_impl(emitter_impl());
  runtime.register_impl(receiver_impl());
  runtime.register_impl(fork_home_impl());
}

void ReceiverLog::record(std::uint64_t seq, std::string payload_hex) {
  std::lock_guard lock(mutex_);
  messages_.push_back(ReceivedMessage{seq, std::move(payload_hex)});
}

std::vector<ReceivedMessage> ReceiverLog::messages() const {
  std::lock_guard lock(mutex_);
  return messages_;
}

std::size_t ReceiverLog::size() const {
  std::lock_guard lock(mutex_);
  return messages_.size();
}

std::shared_ptr<ReceiverLog> receiver_log(Runtime& runtime, ComponentId receiver) {
  return runtime.inspect_state(receiver, [](std::any& state) {
    auto* log = std::any_cast<std::shared_ptr<ReceiverLog>>(&state);
    if (log == nullptr) throw Error(Errc::type, "component is not a Receiver");
    return *log;
  });
}

std::string plaintext_for(std::uint64_t seq) { return fmt::format("msg-{}", seq); }

DemoApp::DemoApp(Runtime& runtime, ComponentId emitter, std::shared_ptr<ReceiverLog> log,
                 std::chrono::milliseconds interval, std::uint64_t count)
    : runtime_(runtime),
      emitter_(emitter),
      log_(std::move(log)),
      interval_(interval),
      count_(count),
      name_(fmt::format("demo#{}", raw(emitter))) {}

DemoApp::~DemoApp() { shutdown(); }

void DemoApp::start() {
  if (!thread_.joinable()) thread_ = std::jthread([this](std::stop_token st) { run(st); });
}

void DemoApp::shutdown() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
}

void DemoApp::run(std::stop_token stop) {
  set_this_thread_label(fmt::format("emitter-{}", raw(emitter_)));
  auto next = std::chrono::steady_clock::now();
  for (std::uint64_t seq = 1; seq <= count_ && !stop.stop_requested(); ++seq) {
    try {
      const Reply reply = runtime_.send_request(
          emitter_, "out", "send", {lang::Value::integer(static_cast<std::int64_t>(seq)), lang::Value::str(to_hex(plaintext_for(seq)))});
      if (!reply.ok()) failed_.fetch_add(1);
    } catch (const std::exception&) {
      failed_.fetch_add(1);
    }
    sent_.fetch_add(1);
    if (interval_.count() > 0) {
      next += interval_;
      std::this_thread::sleep_until(next);
    }
  }
  done_.store(true);
}

bool DemoApp::wait_done(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!done_.load()) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return true;
}

bool DemoApp::wait_received(std::size_t n, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (log_->size() < n) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  return true;
}

DemoTopology deploy_demo(Runtime& runtime, std::chrono::milliseconds interval, std::uint64_t count, bool start) {
  register_demo_impls(runtime);
  DemoTopology topo;
  topo.ca = runtime.create_container("CA");
  topo.cb = runtime.create_container("CB");
  topo.a = runtime.deploy_component(topo.ca, kEmitter, {}, "A");
  topo.b = runtime.deploy_component(topo.cb, kReceiver, {}, "B");
  runtime.connect(topo.a, "out", topo.b, "in");
  topo.app = std::make_shared<DemoApp>(runtime, topo.a, receiver_log(runtime, topo.b), interval, count);
  runtime.attach_service(topo.app);
  if (start) topo.app->start();
  return topo;
}

}  // namespace cvm::demo
