#include "cvm/core/cvm.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include "cvm/lang/printer.hpp"
#include "cvm/util/thread_label.hpp"

namespace cvm::core {

using lang::AstNode;
using lang::FormOutcome;

std::filesystem::path default_journal_path() {
  return std::filesystem::temp_directory_path() / fmt::format("cvm-monitor-{}.log", ::getpid());
}

Cvm::Cvm(Runtime& runtime, NodeConfig config)
    : rt_(runtime), config_(std::move(config)), catalog_(ImplCatalog::builtin()) {
  if (config_.journal.empty()) config_.journal = default_journal_path();
  if (config_.queue_capacity == 0) config_.queue_capacity = 1;
  if (!rt_.mark_bootstrapped()) throw Error(Errc::already_bootstrapped, "this runtime already has a CVM");
  env_ = lang::standard_environment();
  install_keywords();
  publish_symbols();
}

Cvm::~Cvm() { stop(); }

void Cvm::publish_symbols() {
  symbols_.store(std::make_shared<const std::vector<std::string>>(env_.list_symbols()));
}

FormOutcome Cvm::evaluate(const AstNode& form, std::size_t index) {
  std::lock_guard lock(eval_mutex_);
  auto outcome = lang::eval_form(form, env_, index);
  publish_symbols();
  return outcome;
}

std::vector<FormOutcome> Cvm::evaluate_script(const lang::Script& script, bool keep_going) {
  std::vector<FormOutcome> out;
  for (std::size_t i = 0; i < script.forms.size(); ++i) {
    out.push_back(evaluate(script.forms[i], i));
    if (!out.back().ok && !keep_going) break;
  }
  return out;
}

void Cvm::start() {
  std::lock_guard lock(queue_mutex_);
  if (loop_.joinable()) return;
  accepting_ = true;
  loop_ = std::jthread([this](std::stop_token st) { loop(st); });
}

void Cvm::stop() {
  std::jthread t;
  {
    std::lock_guard lock(queue_mutex_);
    accepting_ = false;
    t = std::move(loop_);
  }
  queue_not_full_.notify_all();
  if (t.joinable()) {
    t.request_stop();
    t.join();
  }
  std::deque<Task> orphans;
  {
    std::lock_guard lock(queue_mutex_);
    orphans.swap(queue_);
  }
  for (auto& task : orphans) {
    FormOutcome o;
    o.index = task.index;
    o.code = Errc::connection_lost;
    o.error = "control loop stopped";
    task.done.set_value(std::move(o));
  }
}

bool Cvm::running() const {
  std::lock_guard lock(queue_mutex_);
  return loop_.joinable();
}

std::size_t Cvm::queued() const {
  std::lock_guard lock(queue_mutex_);
  return queue_.size();
}

std::future<FormOutcome> Cvm::submit(AstNode form, std::size_t index) {
  std::unique_lock lock(queue_mutex_);
  queue_not_full_.wait(lock, [&] { return !accepting_ || queue_.size() < config_.queue_capacity; });
  if (!accepting_) throw Error(Errc::connection_lost, "control loop is not running");
  Task task{std::move(form), index, {}};
  auto fut = task.done.get_future();
  queue_.push_back(std::move(task));
  lock.unlock();
  queue_not_empty_.notify_one();
  return fut;
}

lang::FormOutcome Cvm::execute(AstNode form, std::size_t index) {
  if (running()) {
    try {
      return submit(std::move(form), index).get();
    } catch (const Error& e) {
      FormOutcome o;
      o.index = index;
      o.code = e.code();
      o.error = e.what();
      return o;
    }
  }
  return evaluate(form, index);
}

void Cvm::loop(std::stop_token st) {
  set_this_thread_label("cvm-control");
  for (;;) {
    std::unique_lock lock(queue_mutex_);
    if (!queue_not_empty_.wait(lock, st, [&] { return !queue_.empty(); })) return;
    Task task = std::move(queue_.front());
    queue_.pop_front();
    lock.unlock();
    queue_not_full_.notify_one();
    task.done.set_value(evaluate(task.form, task.index));
  }
}

ComponentId Cvm::component_of(const lang::Value& v) const {
  if (v.is_str()) return rt_.find_component(v.as_str());
  if (!v.is_handle() || v.as_handle().kind != lang::HandleKind::component)
    throw Error(Errc::type, "expected a component handle, got " + lang::print_value(v));
  const ComponentId id{v.as_handle().id};
  if (!rt_.has_component(id)) throw Error(Errc::unknown_component, fmt::format("no component {}", raw(id)));
  return id;
}

ContainerId Cvm::container_of(const lang::Value& v) const {
  if (v.is_str()) return rt_.find_container(v.as_str());
  if (!v.is_handle() || v.as_handle().kind != lang::HandleKind::container)
    throw Error(Errc::type, "expected a container handle, got " + lang::print_value(v));
  const ContainerId id{v.as_handle().id};
  if (!rt_.has_container(id)) throw Error(Errc::unknown_container, fmt::format("no container {}", raw(id)));
  return id;
}

}  // namespace cvm::core
