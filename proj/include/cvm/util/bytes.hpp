#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvm {

using Bytes = std::vector<std::uint8_t>;

/// True when `text` is well-formed UTF-8 (no overlongs, no surrogates,
/// nothing above U+10FFFF).
bool is_valid_utf8(std::string_view text) noexcept;

std::string to_hex(std::span<const std::uint8_t> bytes);
inline std::string to_hex(std::string_view text) {
  return to_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Lowercase or uppercase hex, even length; nullopt otherwise.
std::optional<Bytes> from_hex(std::string_view hex);

void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint32_t get_u32_be(const std::uint8_t* p) noexcept;
std::uint64_t get_u64_be(const std::uint8_t* p) noexcept;

}  // namespace cvm
