#pragma once

#include <cstdint>
#include <string>

namespace cvm {

enum class ComponentId : std::uint64_t {};
enum class ContainerId : std::uint64_t {};

constexpr std::uint64_t raw(ComponentId id) noexcept { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(ContainerId id) noexcept { return static_cast<std::uint64_t>(id); }

/// Sender id used for requests issued by the control context itself.
inline constexpr ComponentId kControlSender{0};

enum class ReplyStatus { successful, exception, pending };

inline const char* to_string(ReplyStatus s) noexcept {
  switch (s) {
    case ReplyStatus::successful: return "SUCCESSFUL";
    case ReplyStatus::exception: return "EXCEPTION";
    case ReplyStatus::pending: return "PENDING";
  }
  return "PENDING";
}

}  // namespace cvm
