#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cvm/core/catalog.hpp"
#include "cvm/lang/eval.hpp"
#include "cvm/monitoring/monitor.hpp"
#include "cvm/runtime/runtime.hpp"
#include "cvm/util/snapshot.hpp"

namespace cvm::core {

struct NodeConfig {
  /// Monitoring journal; empty means a per-process file in the temp dir.
  std::filesystem::path journal;
  std::chrono::milliseconds scan_interval{1000};
  /// Forms waiting for the control loop before submit() blocks.
  std::size_t queue_capacity = 64;
};

std::filesystem::path default_journal_path();

/// Mean request latency per no-op interceptor count. Counts are measured in
/// interleaved batches with a rotating start; preempted batches (slower than
/// twice the best batch of the same count) are replaced, so each mean covers
/// at least the requested number of requests.
struct LatencyComparison {
  std::vector<double> mean_us;
  std::vector<std::size_t> requests;
  std::size_t discarded_batches = 0;
};

/// Names every bootstrapped environment defines, besides the base language.
const std::vector<std::string>& keyword_names();

// The reconfiguration entry point of one node. Owns the environment and
// evaluates forms one at a time, either directly (evaluate) or through
// the control loop fed by submit().
class Cvm {
 public:
  /// Bootstraps `runtime`: throws already_bootstrapped when another Cvm
  /// was already created for it.
  explicit Cvm(Runtime& runtime, NodeConfig config = {});
  ~Cvm();
  Cvm(const Cvm&) = delete;
  Cvm& operator=(const Cvm&) = delete;

  Runtime& runtime() noexcept { return rt_; }
  const NodeConfig& config() const noexcept { return config_; }
  const PluginSearchPath& plugin_path() const noexcept { return plugin_path_; }
  ImplCatalog& catalog() noexcept { return catalog_; }

  /// Evaluates one form now, in the calling thread, serialized with every
  /// other evaluation on this node.
  lang::FormOutcome evaluate(const lang::AstNode& form, std::size_t index = 0);
  std::vector<lang::FormOutcome> evaluate_script(const lang::Script& script, bool keep_going = false);

  /// Runs `fn(environment)` serialized with evaluation.
  template <typename F>
  decltype(auto) with_environment(F&& fn) {
    std::lock_guard lock(eval_mutex_);
    return std::forward<F>(fn)(env_);
  }

  // -- control loop ------------------------------------------------------
  void start();
  /// Finishes the form in progress; queued forms fail with connection_lost.
  void stop();
  bool running() const;
  /// Queues a form for the control loop. Blocks while the queue is full.
  /// Throws connection_lost when the loop is not running.
  std::future<lang::FormOutcome> submit(lang::AstNode form, std::size_t index = 0);
  std::size_t queued() const;
  /// submit() and wait when the loop runs, evaluate() otherwise.
  lang::FormOutcome execute(lang::AstNode form, std::size_t index = 0);

  /// Bound names as of the last evaluated form.
  std::shared_ptr<const std::vector<std::string>> symbols() const { return symbols_.load(); }

  /// Resolves a component handle; throws type/unknown_component.
  ComponentId component_of(const lang::Value& v) const;
  ContainerId container_of(const lang::Value& v) const;

 private:
  struct Task {
    lang::AstNode form;
    std::size_t index;
    std::promise<lang::FormOutcome> done;
  };

  void install_keywords();
  void install_registry_keywords();
  void install_invoke_keywords();
  void install_service_keywords();
  void publish_symbols();
  void loop(std::stop_token st);

  lang::Value invoke(const lang::Value& target, const std::string& op, std::span<const lang::Value> args);
  lang::Value invoke_monitor(const std::string& op, std::span<const lang::Value> args);
  std::shared_ptr<monitoring::Monitor> monitor_or_throw() const;
  MethodBody method_by_name(const std::string& name);
  void ensure_bench_pair();
  double measure_latency(std::size_t count);
  LatencyComparison compare_latency(const std::vector<std::size_t>& counts, std::size_t requests,
                                      std::size_t batch);

  Runtime& rt_;
  NodeConfig config_;
  PluginSearchPath plugin_path_;
  ImplCatalog catalog_;

  std::mutex eval_mutex_;
  lang::Environment env_;
  SnapshotCell<std::vector<std::string>> symbols_;

  // Handle registries; only touched while evaluating.
  std::map<std::uint64_t, monitoring::MetricSpec> metric_specs_;
  std::map<std::uint64_t, std::uint64_t> interceptor_services_;  // handle id -> chain registration
  std::uint64_t monitor_handle_ = 0;
  std::weak_ptr<monitoring::Monitor> monitor_;
  std::optional<std::pair<ComponentId, ComponentId>> bench_pair_;

  mutable std::mutex queue_mutex_;
  std::condition_variable_any queue_not_empty_;
  std::condition_variable_any queue_not_full_;
  std::deque<Task> queue_;
  std::jthread loop_;
  bool accepting_ = false;
};

}  // namespace cvm::core
