#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "cvm/crypto/cipher.hpp"
#include "cvm/lang/value.hpp"
#include "cvm/runtime/runtime.hpp"

namespace cvm::crypto {

inline constexpr std::string_view kCosImplName = "CryptoCOS";

struct CosState {
  Bytes key = kDefaultKey;
};

// "CryptoCOS": facet "in", receptacle "out".
//   send(seq, payload-hex)  encrypts the payload with the active `encrypt`
//                           version and forwards send(seq, cipher-hex)
//                           through "out", returning the downstream payload
//   encrypt(payload-hex)    the replaceable method; rolling XOR by default
//   set_key(key-hex)
// Init args: optional key as a hex string.
std::shared_ptr<ComponentImpl> cos_impl();

/// An `encrypt` body for the named cipher ("xor" uses the instance key).
/// Empty when the name is unknown.
MethodBody encrypt_method(std::string_view cipher_name);

/// Deploys a COS into `container` and reroutes source -> target through
/// it in one table swap. Precondition: source is currently connected to
/// target; on failure nothing is deployed and nothing is rewired.
ComponentId interpose(Runtime& runtime, ContainerId container, const ReceptacleRef& source, const FacetRef& target,
                      std::string_view impl_name = kCosImplName, std::span<const lang::Value> init_args = {});

/// Inverse of interpose for any component with exactly one inbound and one
/// outbound connection: restores the direct connection, then removes it.
void deinterpose(Runtime& runtime, ComponentId cos);

}  // namespace cvm::crypto
