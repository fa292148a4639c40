#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cvm/util/bytes.hpp"

namespace cvm::crypto {

/// Each byte XORed with the key byte at the same position modulo the key
/// length. An empty key is the identity.
Bytes xor_rolling(std::span<const std::uint8_t> data, std::span<const std::uint8_t> key);

/// Byte-wise shift modulo 256.
Bytes caesar(std::span<const std::uint8_t> data, int shift);

// Desk-scale ciphers: the point is exercising interposition and method
// replacement, not confidentiality.
struct CipherSpec {
  using Transform = std::function<Bytes(std::span<const std::uint8_t> data, std::span<const std::uint8_t> key)>;

  std::string name;
  Bytes key;
  Transform encrypt;
  Transform decrypt;

  Bytes seal(std::span<const std::uint8_t> m) const { return encrypt(m, key); }
  Bytes open(std::span<const std::uint8_t> c) const { return decrypt(c, key); }

  static CipherSpec xor_rolling(Bytes key);
  static CipherSpec caesar(int shift);
};

/// Default key of the crypto COS: the bytes of "CVM".
inline const Bytes kDefaultKey{0x43, 0x56, 0x4D};

/// Looks up a cipher by the name used in method catalogs: "xor" (with
/// `key`), "caesar<N>" for a shift of N (e.g. "caesar3").
std::optional<CipherSpec> cipher_by_name(std::string_view name, Bytes key = kDefaultKey);

}  // namespace cvm::crypto
