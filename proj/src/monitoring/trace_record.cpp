#include "cvm/monitoring/trace_record.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <array>
#include <charconv>
#include <ctime>
#include <vector>

namespace cvm::monitoring {
namespace {

constexpr std::array<std::string_view, 14> kKeys = {
    "date",      "thread",     "topic",      "class",   "method",       "line",   "request_id",
    "operation", "arguments",  "exceptions", "response_expected", "reply_status", "target", "mono_us"};

void escape_into(std::string& out, std::string_view v) {
  for (char c : v) {
    switch (c) {
      case '%': out += "%25"; break;
      case '=': out += "%3D"; break;
      case '\n': out += "%0A"; break;
      case '\r': out += "%0D"; break;
      default: out += c;
    }
  }
}

std::optional<std::string> unescape(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '%') {
      out += v[i];
      continue;
    }
    if (i + 2 >= v.size()) return std::nullopt;
    const auto code = v.substr(i + 1, 2);
    if (code == "25") out += '%';
    else if (code == "3D") out += '=';
    else if (code == "0A") out += '\n';
    else if (code == "0D") out += '\r';
    else return std::nullopt;
    i += 2;
  }
  return out;
}

template <typename T>
std::optional<T> to_uint(std::string_view s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<ReplyStatus> reply_status_from_string(std::string_view s) noexcept {
  if (s == "SUCCESSFUL") return ReplyStatus::successful;
  if (s == "EXCEPTION") return ReplyStatus::exception;
  if (s == "PENDING") return ReplyStatus::pending;
  return std::nullopt;
}

std::string format_record(const TraceRecord& r) {
  std::string out = "INFO";
  out.reserve(256);
  auto field = [&](std::string_view key, std::string_view value) {
    out += ' ';
    out += key;
    out += '=';
    escape_into(out, value);
  };
  field("date", r.date);
  field("thread", r.thread);
  field("topic", r.topic);
  field("class", r.class_name);
  field("method", r.method);
  field("line", std::to_string(r.line));
  field("request_id", std::to_string(r.request_id));
  field("operation", r.operation);
  field("arguments", r.arguments);
  field("exceptions", r.exceptions);
  field("response_expected", r.response_expected ? "true" : "false");
  field("reply_status", to_string(r.reply_status));
  field("target", r.target);
  if (r.mono_us) field("mono_us", std::to_string(*r.mono_us));
  return out;
}

std::optional<TraceRecord> parse_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (!line.starts_with("INFO ")) return std::nullopt;
  line.remove_prefix(5);

  // Split on single spaces. A piece without '=' continues the previous
  // value (values may contain spaces but never a raw '=').
  std::vector<std::pair<std::string_view, std::string>> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto next = line.find(' ', pos);
    const auto piece = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    const auto eq = piece.find('=');
    if (eq == std::string_view::npos) {
      if (fields.empty()) return std::nullopt;
      fields.back().second += ' ';
      fields.back().second += piece;
    } else {
      const auto value = piece.substr(eq + 1);
      if (value.find('=') != std::string_view::npos) return std::nullopt;
      fields.emplace_back(piece.substr(0, eq), std::string(value));
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (fields.size() != kKeys.size() && fields.size() != kKeys.size() - 1) return std::nullopt;

  std::array<std::string, kKeys.size()> v;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].first != kKeys[i]) return std::nullopt;
    auto u = unescape(fields[i].second);
    if (!u) return std::nullopt;
    v[i] = std::move(*u);
  }

  TraceRecord r;
  r.date = std::move(v[0]);
  r.thread = std::move(v[1]);
  r.topic = std::move(v[2]);
  r.class_name = std::move(v[3]);
  r.method = std::move(v[4]);
  const auto ln = to_uint<std::uint32_t>(v[5]);
  const auto rid = to_uint<std::uint64_t>(v[6]);
  if (!ln || !rid) return std::nullopt;
  r.line = *ln;
  r.request_id = *rid;
  r.operation = std::move(v[7]);
  r.arguments = std::move(v[8]);
  r.exceptions = std::move(v[9]);
  if (v[10] == "true") r.response_expected = true;
  else if (v[10] == "false") r.response_expected = false;
  else return std::nullopt;
  const auto st = reply_status_from_string(v[11]);
  if (!st) return std::nullopt;
  r.reply_status = *st;
  r.target = std::move(v[12]);
  if (fields.size() == kKeys.size()) {
    const auto m = to_uint<std::uint64_t>(v[13]);
    if (!m) return std::nullopt;
    r.mono_us = *m;
  }
  return r;
}

std::string format_wall_clock(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
  const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  localtime_r(&tt, &tm);
  return fmt::format("{:%Y-%m-%d %H:%M:%S},{:03d}", tm, ms);
}

std::uint64_t monotonic_micros() noexcept {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

}  // namespace cvm::monitoring
