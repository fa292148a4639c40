#include "cvm/crypto/cipher.hpp"

#include <charconv>

namespace cvm::crypto {

Bytes xor_rolling(std::span<const std::uint8_t> data, std::span<const std::uint8_t> key) {
  Bytes out(data.begin(), data.end());
  if (key.empty()) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= key[i % key.size()];
  return out;
}

Bytes caesar(std::span<const std::uint8_t> data, int shift) {
  Bytes out;
  out.reserve(data.size());
  for (auto b : data) out.push_back(static_cast<std::uint8_t>((b + shift) & 0xFF));
  return out;
}

CipherSpec CipherSpec::xor_rolling(Bytes key) {
  auto t = [](std::span<const std::uint8_t> d, std::span<const std::uint8_t> k) { return crypto::xor_rolling(d, k); };
  return CipherSpec{"xor", std::move(key), t, t};
}

CipherSpec CipherSpec::caesar(int shift) {
  return CipherSpec{"caesar" + std::to_string(shift),
                    {},
                    [shift](std::span<const std::uint8_t> d, std::span<const std::uint8_t>) {
                      return crypto::caesar(d, shift);
                    },
                    [shift](std::span<const std::uint8_t> d, std::span<const std::uint8_t>) {
                      return crypto::caesar(d, -shift);
                    }};
}

std::optional<CipherSpec> cipher_by_name(std::string_view name, Bytes key) {
  if (name == "xor") return CipherSpec::xor_rolling(std::move(key));
  constexpr std::string_view kCaesar = "caesar";
  if (name.substr(0, kCaesar.size()) == kCaesar && name.size() > kCaesar.size()) {
    const std::string_view digits = name.substr(kCaesar.size());
    int shift = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), shift);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) return CipherSpec::caesar(shift);
  }
  return std::nullopt;
}

}  // namespace cvm::crypto
