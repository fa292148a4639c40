#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cvm {

enum class Errc {
  // language
  parse,
  decode,
  unbound_symbol,
  not_callable,
  not_a_value,
  arity,
  bad_form,
  type,
  recursion_limit,
  host,
  // component runtime
  unknown_implementation,
  unknown_container,
  unknown_component,
  unknown_operation,
  unknown_port,
  still_connected,
  receptacle_bound,
  unbound_receptacle,
  precondition,
  // cvm / services
  already_bootstrapped,
  already_installed,
  not_installed,
  not_found,
  unknown_handle,
  io,
  // remote admin
  protocol,
  connection_refused,
  connection_lost,
};

std::string_view to_string(Errc code) noexcept;

// Base error for every module. The code is what callers branch on; the
// message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cvm
