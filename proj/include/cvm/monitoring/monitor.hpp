#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cvm/monitoring/trace_record.hpp"
#include "cvm/runtime/runtime.hpp"

namespace cvm::monitoring {

inline constexpr std::string_view kMonitorServiceName = "Monitor";

struct CountMethod {
  std::string impl;
  std::string operation;
};
struct CountComponent {
  std::string impl;
};
struct Temporal {
  std::string impl;
  std::string operation;
};
// Counts every completed request and rewrites `path` with its current
// value after each scan that changed something.
struct DebugMetric {
  std::filesystem::path path;
};

using MetricSpec = std::variant<CountMethod, CountComponent, Temporal, DebugMetric>;

std::string kind_name(const MetricSpec& spec);
std::string describe(const MetricSpec& spec);

using MetricHandle = std::uint64_t;

struct TemporalStats {
  std::uint64_t min_us = 0;
  std::uint64_t max_us = 0;
  std::uint64_t total_us = 0;
  double mean_us = 0;
};

struct MetricSnapshot {
  MetricHandle handle = 0;
  std::string kind;
  std::string impl;
  std::string operation;
  bool active = true;
  std::uint64_t count = 0;
  std::optional<TemporalStats> temporal;
};

// All metrics as of the same scanned journal prefix.
struct MonitorSnapshot {
  std::uint64_t generation = 0;
  std::uint64_t scanned_bytes = 0;
  std::uint64_t skipped_lines = 0;
  bool running = false;
  std::vector<MetricSnapshot> metrics;
};

struct MonitorConfig {
  std::filesystem::path journal;
  std::chrono::milliseconds scan_interval{1000};
};

// Interceptor-backed trace journal plus metrics computed by scanning it.
//
// Request contexts append two lines per request (receive_request and
// send_reply). A scanner, periodic once started or on demand through
// scan_now(), parses new complete lines and feeds the registered metrics.
class Monitor : public Service, public std::enable_shared_from_this<Monitor> {
 public:
  /// Opens the journal append-only, registers the interceptor and attaches
  /// the service. Throws already_installed or io.
  static std::shared_ptr<Monitor> install(Runtime& rt, MonitorConfig config);
  /// Stops, unregisters the interceptor and detaches. False when absent.
  static bool uninstall(Runtime& rt);
  static std::shared_ptr<Monitor> find(const Runtime& rt);

  ~Monitor() override;

  std::string_view service_name() const noexcept override { return kMonitorServiceName; }
  void shutdown() override;

  /// Counts only requests completing after this call.
  MetricHandle register_metric(MetricSpec spec);
  /// Runs one scan, then freezes the metric (it stays listed, inactive).
  /// False when the handle is unknown or already inactive.
  bool unregister_metric(MetricHandle handle);
  bool has_metric(MetricHandle handle) const;

  /// Idempotent.
  void start();
  /// Returns after the current pass, if any, has finished.
  void stop();
  bool running() const;

  /// One synchronous pass over the journal's new complete lines.
  void scan_now();
  MonitorSnapshot snapshot() const;
  /// Bumped whenever a pass changed a metric or the metric set changed.
  std::uint64_t generation() const;

  const std::filesystem::path& journal_path() const noexcept { return config_.journal; }
  std::uint64_t interceptor_id() const noexcept { return interceptor_id_; }

  class Journal;

 private:
  struct Metric {
    MetricHandle handle = 0;
    MetricSpec spec;
    std::uint64_t start_offset = 0;  // journal bytes before registration
    bool active = true;
    std::uint64_t count = 0;
    TemporalStats temporal;
  };

  Monitor(Runtime& rt, MonitorConfig config, std::shared_ptr<Journal> journal);
  void scan_pass_locked();
  void dump_debug_metrics_locked() const;
  MetricSnapshot snapshot_of(const Metric& m) const;

  Runtime& rt_;
  MonitorConfig config_;
  std::shared_ptr<Journal> journal_;
  std::uint64_t interceptor_id_ = 0;

  // scan_mutex_ serializes passes; state_mutex_ guards metrics and totals.
  std::mutex scan_mutex_;
  mutable std::mutex state_mutex_;
  std::map<MetricHandle, Metric> metrics_;
  std::uint64_t offset_ = 0;
  std::uint64_t skipped_ = 0;
  std::uint64_t generation_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> pending_receive_;  // request_id -> mono_us

  mutable std::mutex run_mutex_;
  std::jthread scanner_;
  std::condition_variable_any wake_;
};

}  // namespace cvm::monitoring
