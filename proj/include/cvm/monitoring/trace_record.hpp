#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cvm/runtime/ids.hpp"

namespace cvm::monitoring {

inline constexpr std::string_view kTraceTopic = "cvm.interceptors.server";
inline constexpr std::string_view kMethodReceive = "receive_request";
inline constexpr std::string_view kMethodReply = "send_reply";

// One journal line. Fields are written in declaration order as
// `key=value`, after a leading `INFO`.
struct TraceRecord {
  std::string date;  // YYYY-MM-DD HH:MM:SS,mmm (local wall clock)
  std::string thread;
  std::string topic{kTraceTopic};
  std::string class_name;  // target impl
  std::string method;      // receive_request | send_reply
  std::uint32_t line = 0;
  std::uint64_t request_id = 0;
  std::string operation;
  std::string arguments;
  std::string exceptions;
  bool response_expected = true;
  ReplyStatus reply_status = ReplyStatus::pending;
  std::string target;  // IDL:<impl>:1.0
  // Monotonic microseconds: the slot-1 timestamp on receive lines, the
  // reply instant on send_reply lines. Absent in foreign journals.
  std::optional<std::uint64_t> mono_us;

  bool operator==(const TraceRecord&) const = default;
};

/// Single line, no trailing newline. Values are escaped so that they never
/// contain `=`, `%`, CR or LF.
std::string format_record(const TraceRecord& r);

/// Inverse of format_record. nullopt for lines that are not trace records.
std::optional<TraceRecord> parse_record(std::string_view line);

std::string format_wall_clock(std::chrono::system_clock::time_point t);

std::uint64_t monotonic_micros() noexcept;

std::optional<ReplyStatus> reply_status_from_string(std::string_view s) noexcept;

}  // namespace cvm::monitoring
