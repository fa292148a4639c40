#include "cvm/error.hpp"

namespace cvm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::parse: return "parse";
    case Errc::decode: return "decode";
    case Errc::unbound_symbol: return "unbound-symbol";
    case Errc::not_callable: return "not-callable";
    case Errc::not_a_value: return "not-a-value";
    case Errc::arity: return "arity";
    case Errc::bad_form: return "bad-form";
    case Errc::type: return "type";
    case Errc::recursion_limit: return "recursion-limit";
    case Errc::host: return "host";
    case Errc::unknown_implementation: return "unknown-implementation";
    case Errc::unknown_container: return "unknown-container";
    case Errc::unknown_component: return "unknown-component";
    case Errc::unknown_operation: return "unknown-operation";
    case Errc::unknown_port: return "unknown-port";
    case Errc::still_connected: return "still-connected";
    case Errc::receptacle_bound: return "receptacle-bound";
    case Errc::unbound_receptacle: return "unbound-receptacle";
    case Errc::precondition: return "precondition";
    case Errc::already_bootstrapped: return "already-bootstrapped";
    case Errc::already_installed: return "already-installed";
    case Errc::not_installed: return "not-installed";
    case Errc::not_found: return "not-found";
    case Errc::unknown_handle: return "unknown-handle";
    case Errc::io: return "io";
    case Errc::protocol: return "protocol";
    case Errc::connection_refused: return "connection-refused";
    case Errc::connection_lost: return "connection-lost";
  }
  return "unknown";
}

}  // namespace cvm
