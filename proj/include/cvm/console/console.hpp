#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvm/admin/client.hpp"

namespace cvm::console {

enum class Mode { repl, batch, bench };

struct ConsoleConfig {
  std::vector<admin::Target> targets;
  Mode mode = Mode::repl;
  std::optional<std::filesystem::path> script;  // batch only
  bool keep_going = false;
  bool porcelain = false;
  // bench
  std::size_t bench_repetitions = 10;
  std::size_t bench_requests = 100000;  // per interceptor count and repetition
};

/// Throws Error(type) when the invariants do not hold.
void validate(const ConsoleConfig& config);

/// Targets from CVM_TARGETS, or empty.
std::vector<admin::Target> targets_from_env();

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFormError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConnection = 3;

/// 0 iff every form succeeded.
int batch_exit_code(const std::vector<admin::RemoteOutcome>& outcomes);

/// `index<TAB>ok|err<TAB>payload`; newlines and tabs in the payload are escaped.
std::string porcelain_line(const admin::RemoteOutcome& o);

int run_repl(const ConsoleConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int run_batch(const ConsoleConfig& config, std::ostream& out, std::ostream& err);

// Bench harness.

struct Stat {
  double mean = 0;
  double stddev = 0;
  std::size_t samples = 0;
};
Stat summarize(const std::vector<double>& xs);

struct BenchReport {
  Stat monitoring_s;     // monitoring integration script, wall clock
  Stat cos_add_s;        // interposition script, wall clock
  Stat latency_us[3];    // 0, 1, 4 no-op interceptors
  Stat latency_with_monitor_us;
  Stat latency_after_removal_us;
  std::size_t requests_per_sample = 0;
  std::size_t discarded_batches = 0;

  bool latency_monotone() const {
    return latency_us[0].mean <= latency_us[1].mean && latency_us[1].mean <= latency_us[2].mean;
  }
};

inline constexpr double kReferenceMonitoringSeconds = 8.539;
inline constexpr double kReferenceCosAddSeconds = 2.054;

/// Runs against one node with the demo deployed. Throws Error(precondition) otherwise.
BenchReport run_bench(admin::AdminClient& client, std::size_t repetitions, std::size_t requests);
void print_bench(const BenchReport& r, std::ostream& out);
int run_bench_mode(const ConsoleConfig& config, std::ostream& out, std::ostream& err);

int run(const ConsoleConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace cvm::console
