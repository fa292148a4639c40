#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "cvm/error.hpp"
#include "cvm/lang/ast.hpp"
#include "cvm/util/bytes.hpp"

namespace cvm::lang {

// Binary AST encoding, all integers big-endian:
//   0x01 Symbol | 0x02 Str   u32 byte length, UTF-8 bytes
//   0x03 Int                 8 bytes two's complement
//   0x04 Float               8 bytes IEEE-754
//   0x05 List                u32 child count, children in order
namespace tag {
inline constexpr std::uint8_t kSymbol = 0x01;
inline constexpr std::uint8_t kStr = 0x02;
inline constexpr std::uint8_t kInt = 0x03;
inline constexpr std::uint8_t kFloat = 0x04;
inline constexpr std::uint8_t kList = 0x05;
}  // namespace tag

enum class DecodeErrc {
  unknown_tag,
  truncated,
  invalid_utf8,
  length_exceeds_input,
  invalid_symbol,
  too_deep,
};

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrc kind, std::size_t offset, const std::string& what)
      : Error(Errc::decode, what), kind_(kind), offset_(offset) {}

  DecodeErrc kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  DecodeErrc kind_;
  std::size_t offset_;
};

Bytes encode_ast(const AstNode& node);
void encode_ast_to(Bytes& out, const AstNode& node);

/// Decodes one node from the front of `bytes`; returns it with the number of
/// bytes consumed. Trailing bytes are left alone.
std::pair<AstNode, std::size_t> decode_ast(std::span<const std::uint8_t> bytes);

}  // namespace cvm::lang
