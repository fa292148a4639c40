#include "cvm/monitoring/monitor.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "cvm/error.hpp"
#include "cvm/util/thread_label.hpp"

namespace cvm::monitoring {

// Append-only journal. One write(2) per line on an O_APPEND descriptor,
// so concurrent appends never interleave within a line.
class Monitor::Journal {
 public:
  explicit Journal(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(Errc::io, "journal " + path.string() + ": " + std::strerror(errno));
  }
  ~Journal() { ::close(fd_); }
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  void append(std::string line) {
    line += '\n';
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      const auto n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        return;  // nothing sensible to do from inside a request
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::uint64_t size() const {
    const auto end = ::lseek(fd_, 0, SEEK_END);
    return end < 0 ? 0 : static_cast<std::uint64_t>(end);
  }

 private:
  int fd_ = -1;
};

namespace {

void trace(Monitor::Journal& journal, InterceptionPoint point, RequestInfo& info) {
  TraceRecord r;
  r.date = format_wall_clock(std::chrono::system_clock::now());
  r.thread = this_thread_label();
  r.class_name = info.target_impl();
  r.request_id = info.request_id();
  r.operation = info.operation();
  r.arguments = info.arguments();
  r.exceptions = info.exception_text();
  r.response_expected = info.response_expected();
  r.reply_status = info.reply_status();
  r.target = info.target_interface();
  const auto now = monotonic_micros();
  r.mono_us = now;
  if (point == InterceptionPoint::server_receive_request) {
    Bytes stamp;
    put_u64_be(stamp, now);
    info.slot_set(kTimestampSlot, std::move(stamp));
    r.method = kMethodReceive;
  } else {
    r.method = kMethodReply;
  }
  journal.append(format_record(r));
}

const std::string& spec_impl(const MetricSpec& spec) {
  static const std::string none;
  return std::visit(
      [](const auto& s) -> const std::string& {
        if constexpr (requires { s.impl; }) return s.impl;
        else return none;
      },
      spec);
}

std::string spec_operation(const MetricSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        if constexpr (requires { s.operation; }) return s.operation;
        else return {};
      },
      spec);
}

bool matches(const MetricSpec& spec, const TraceRecord& r) {
  return std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DebugMetric>) return true;
        else if constexpr (std::is_same_v<S, CountComponent>) return r.class_name == s.impl;
        else return r.class_name == s.impl && r.operation == s.operation;
      },
      spec);
}

}  // namespace

std::string kind_name(const MetricSpec& spec) {
  static constexpr const char* names[] = {"CountMethod", "CountComponent", "Temporal", "DebugMetric"};
  return names[spec.index()];
}

std::string describe(const MetricSpec& spec) {
  std::string out = kind_name(spec) + "(";
  if (const auto* d = std::get_if<DebugMetric>(&spec)) {
    out += d->path.string();
  } else {
    out += spec_impl(spec);
    if (const auto op = spec_operation(spec); !op.empty()) out += ", " + op;
  }
  return out + ")";
}

std::shared_ptr<Monitor> Monitor::install(Runtime& rt, MonitorConfig config) {
  if (rt.find_service(kMonitorServiceName)) throw Error(Errc::already_installed, "monitoring is already installed");
  if (config.journal.empty()) throw Error(Errc::io, "journal path is empty");
  auto journal = std::make_shared<Journal>(config.journal);
  std::shared_ptr<Monitor> mon(new Monitor(rt, std::move(config), journal));
  {
    std::lock_guard lock(mon->state_mutex_);
    mon->offset_ = journal->size();
  }
  mon->interceptor_id_ = rt.interceptors().register_interceptor(
      {InterceptionPoint::server_receive_request, InterceptionPoint::server_send_reply},
      [journal](InterceptionPoint p, RequestInfo& info) { trace(*journal, p, info); });
  try {
    rt.attach_service(mon);
  } catch (...) {
    rt.interceptors().unregister_interceptor(mon->interceptor_id_);
    throw;
  }
  return mon;
}

bool Monitor::uninstall(Runtime& rt) { return rt.detach_service(kMonitorServiceName); }

std::shared_ptr<Monitor> Monitor::find(const Runtime& rt) {
  return rt.find_service_as<Monitor>(kMonitorServiceName);
}

Monitor::Monitor(Runtime& rt, MonitorConfig config, std::shared_ptr<Journal> journal)
    : rt_(rt), config_(std::move(config)), journal_(std::move(journal)) {}

Monitor::~Monitor() { stop(); }

void Monitor::shutdown() {
  stop();
  rt_.interceptors().unregister_interceptor(interceptor_id_);
}

MetricHandle Monitor::register_metric(MetricSpec spec) {
  Metric m;
  m.handle = rt_.next_id();
  m.spec = std::move(spec);
  m.start_offset = journal_->size();
  const auto h = m.handle;
  std::lock_guard lock(state_mutex_);
  metrics_.emplace(h, std::move(m));
  ++generation_;
  return h;
}

bool Monitor::unregister_metric(MetricHandle handle) {
  std::lock_guard scan(scan_mutex_);
  std::lock_guard lock(state_mutex_);
  const auto it = metrics_.find(handle);
  if (it == metrics_.end() || !it->second.active) return false;
  scan_pass_locked();
  it->second.active = false;
  ++generation_;
  return true;
}

bool Monitor::has_metric(MetricHandle handle) const {
  std::lock_guard lock(state_mutex_);
  return metrics_.contains(handle);
}

void Monitor::start() {
  std::lock_guard lock(run_mutex_);
  if (scanner_.joinable()) return;
  scanner_ = std::jthread([this](std::stop_token st) {
    set_this_thread_label("monitor-scanner");
    std::mutex m;
    std::unique_lock lk(m);
    while (!st.stop_requested()) {
      scan_now();
      wake_.wait_for(lk, st, config_.scan_interval, [] { return false; });
    }
  });
  std::lock_guard state(state_mutex_);
  ++generation_;
}

void Monitor::stop() {
  std::jthread t;
  {
    std::lock_guard lock(run_mutex_);
    t = std::move(scanner_);
  }
  if (!t.joinable()) return;
  t.request_stop();
  t.join();
  std::lock_guard state(state_mutex_);
  ++generation_;
}

bool Monitor::running() const {
  std::lock_guard lock(run_mutex_);
  return scanner_.joinable();
}

void Monitor::scan_now() {
  std::lock_guard scan(scan_mutex_);
  std::lock_guard lock(state_mutex_);
  scan_pass_locked();
}

// Reads complete lines past offset_ and applies them. A trailing line
// without its newline is left for the next pass.
void Monitor::scan_pass_locked() {
  std::ifstream in(config_.journal, std::ios::binary);
  if (!in) return;
  in.seekg(static_cast<std::streamoff>(offset_));
  std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto last_nl = chunk.rfind('\n');
  if (last_nl == std::string::npos) return;

  bool changed = false;
  std::size_t pos = 0;
  while (pos <= last_nl) {
    const auto nl = chunk.find('\n', pos);
    const std::uint64_t line_offset = offset_ + pos;
    const auto rec = parse_record(std::string_view(chunk).substr(pos, nl - pos));
    pos = nl + 1;
    if (!rec) {
      ++skipped_;
      continue;
    }
    if (rec->method == kMethodReceive) {
      if (rec->mono_us) pending_receive_[rec->request_id] = *rec->mono_us;
      continue;
    }
    if (rec->method != kMethodReply) {
      ++skipped_;
      continue;
    }
    std::optional<std::uint64_t> duration;
    if (const auto it = pending_receive_.find(rec->request_id); it != pending_receive_.end()) {
      if (rec->mono_us && *rec->mono_us >= it->second) duration = *rec->mono_us - it->second;
      pending_receive_.erase(it);
    }
    for (auto& [h, m] : metrics_) {
      if (!m.active || line_offset < m.start_offset || !matches(m.spec, *rec)) continue;
      if (std::holds_alternative<Temporal>(m.spec)) {
        if (!duration) continue;
        auto& t = m.temporal;
        t.min_us = m.count == 0 ? *duration : std::min(t.min_us, *duration);
        t.max_us = std::max(t.max_us, *duration);
        t.total_us += *duration;
        ++m.count;
        t.mean_us = static_cast<double>(t.total_us) / static_cast<double>(m.count);
      } else {
        ++m.count;
      }
      changed = true;
    }
  }
  offset_ += last_nl + 1;
  if (changed) {
    ++generation_;
    dump_debug_metrics_locked();
  }
}

void Monitor::dump_debug_metrics_locked() const {
  for (const auto& [h, m] : metrics_) {
    const auto* d = std::get_if<DebugMetric>(&m.spec);
    if (!d || !m.active) continue;
    std::ofstream out(d->path, std::ios::trunc);
    out << "metric=" << h << " kind=DebugMetric count=" << m.count << " scanned_bytes=" << offset_ << '\n';
  }
}

MetricSnapshot Monitor::snapshot_of(const Metric& m) const {
  MetricSnapshot s;
  s.handle = m.handle;
  s.kind = kind_name(m.spec);
  s.impl = spec_impl(m.spec);
  s.operation = spec_operation(m.spec);
  s.active = m.active;
  s.count = m.count;
  if (std::holds_alternative<Temporal>(m.spec)) s.temporal = m.temporal;
  return s;
}

MonitorSnapshot Monitor::snapshot() const {
  const bool is_running = running();
  std::lock_guard lock(state_mutex_);
  MonitorSnapshot out;
  out.generation = generation_;
  out.scanned_bytes = offset_;
  out.skipped_lines = skipped_;
  out.running = is_running;
  for (const auto& [h, m] : metrics_) out.metrics.push_back(snapshot_of(m));
  return out;
}

std::uint64_t Monitor::generation() const {
  std::lock_guard lock(state_mutex_);
  return generation_;
}

}  // namespace cvm::monitoring
