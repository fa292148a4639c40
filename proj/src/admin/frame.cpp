#include "cvm/admin/frame.hpp"

#include "cvm/error.hpp"
#include "cvm/lang/codec.hpp"

namespace cvm::admin {

const char* to_string(MsgType t) noexcept {
  switch (t) {
    case MsgType::eval: return "EVAL";
    case MsgType::result: return "RESULT";
    case MsgType::error: return "ERROR";
    case MsgType::ping: return "PING";
    case MsgType::pong: return "PONG";
    case MsgType::bye: return "BYE";
  }
  return "?";
}

const char* to_string(HeaderProblem p) noexcept {
  switch (p) {
    case HeaderProblem::bad_magic: return "bad magic";
    case HeaderProblem::bad_version: return "unsupported protocol version";
    case HeaderProblem::unknown_type: return "unknown message type";
    case HeaderProblem::too_large: return "payload too large";
  }
  return "?";
}

Frame Frame::eval(const lang::AstNode& form) { return {MsgType::eval, lang::encode_ast(form)}; }

Frame Frame::result(const lang::Value& value) { return {MsgType::result, lang::encode_ast(lang::value_to_ast(value))}; }

Frame Frame::error(std::string_view text) { return {MsgType::error, Bytes(text.begin(), text.end())}; }

Bytes encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) throw Error(Errc::protocol, "frame payload exceeds 16 MiB");
  Bytes out;
  out.reserve(kHeaderSize + frame.payload.size());
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  put_u32_be(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

HeaderResult parse_header(std::span<const std::uint8_t, kHeaderSize> b) noexcept {
  if (b[0] != kMagic0 || b[1] != kMagic1) return {std::nullopt, HeaderProblem::bad_magic};
  if (b[2] != kProtocolVersion) return {std::nullopt, HeaderProblem::bad_version};
  if (b[3] < 0x01 || b[3] > 0x06) return {std::nullopt, HeaderProblem::unknown_type};
  const auto len = get_u32_be(b.data() + 4);
  if (len > kMaxPayload) return {std::nullopt, HeaderProblem::too_large};
  return {FrameHeader{static_cast<MsgType>(b[3]), len}, {}};
}

std::optional<std::string> validate_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return "shorter than a header";
  const auto h = parse_header(bytes.first<kHeaderSize>());
  if (!h.header) return to_string(h.problem);
  const auto payload = bytes.subspan(kHeaderSize);
  if (payload.size() != h.header->payload_len) return "declared length does not match payload";
  switch (h.header->type) {
    case MsgType::eval:
    case MsgType::result:
      try {
        const auto [node, used] = lang::decode_ast(payload);
        if (used != payload.size()) return "payload holds more than one node";
      } catch (const Error& e) {
        return std::string("payload: ") + e.what();
      }
      return std::nullopt;
    case MsgType::error:
      if (!is_valid_utf8({reinterpret_cast<const char*>(payload.data()), payload.size()}))
        return "ERROR text is not UTF-8";
      return std::nullopt;
    default:
      if (!payload.empty()) return std::string(to_string(h.header->type)) + " must have an empty payload";
      return std::nullopt;
  }
}

}  // namespace cvm::admin
