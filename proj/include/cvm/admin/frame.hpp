#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cvm/lang/ast.hpp"
#include "cvm/lang/value.hpp"
#include "cvm/util/bytes.hpp"

namespace cvm::admin {

enum class MsgType : std::uint8_t {
  eval = 0x01,
  result = 0x02,
  error = 0x03,
  ping = 0x04,
  pong = 0x05,
  bye = 0x06,
};

const char* to_string(MsgType t) noexcept;

inline constexpr std::uint8_t kMagic0 = 0x43;
inline constexpr std::uint8_t kMagic1 = 0x56;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::uint32_t kMaxPayload = 16u << 20;

inline constexpr std::uint16_t kDefaultAdminPort = 4777;
inline constexpr std::uint16_t kDefaultGatewayPort = 4778;

struct Frame {
  MsgType type = MsgType::ping;
  Bytes payload;

  static Frame eval(const lang::AstNode& form);
  /// RESULT carrying value_to_ast(value).
  static Frame result(const lang::Value& value);
  static Frame error(std::string_view text);
  static Frame control(MsgType type) { return {type, {}}; }
};

Bytes encode_frame(const Frame& frame);

enum class HeaderProblem {
  bad_magic,
  bad_version,
  unknown_type,
  too_large,
};

const char* to_string(HeaderProblem p) noexcept;

struct FrameHeader {
  MsgType type;
  std::uint32_t payload_len;
};

/// Reads the 8-byte header. Either a header or the reason it is invalid.
struct HeaderResult {
  std::optional<FrameHeader> header;
  HeaderProblem problem{};
};
HeaderResult parse_header(std::span<const std::uint8_t, kHeaderSize> bytes) noexcept;

/// Full check of one complete frame: header, declared length, and the
/// payload rules of its type. nullopt when valid, else the reason.
std::optional<std::string> validate_frame(std::span<const std::uint8_t> bytes);

}  // namespace cvm::admin
