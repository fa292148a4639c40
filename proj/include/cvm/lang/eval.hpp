#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvm/error.hpp"
#include "cvm/lang/ast.hpp"
#include "cvm/lang/environment.hpp"
#include "cvm/lang/value.hpp"

namespace cvm::lang {

// Evaluation failure. `form()` is the printed form that failed.
class EvalError : public Error {
 public:
  EvalError(Errc code, const std::string& message, std::string form)
      : Error(code, message + " in " + form), form_(std::move(form)), detail_(message) {}

  const std::string& form() const noexcept { return form_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string form_;
  std::string detail_;
};

inline constexpr std::size_t kMaxEvalDepth = 1000;

Value eval(const AstNode& form, Environment& env);

struct FormOutcome {
  std::size_t index = 0;
  bool ok = false;
  Value value;        // when ok
  Errc code{};        // when !ok
  std::string error;  // when !ok
};

/// Evaluates forms first to last. Stops after the first failing form unless
/// `keep_going` is set.
std::vector<FormOutcome> eval_script(const Script& script, Environment& env, bool keep_going = false);

/// Evaluates one form, converting any failure into an outcome.
FormOutcome eval_form(const AstNode& form, Environment& env, std::size_t index = 0);

/// define, undefine, defproc, if, begin.
void install_special_forms(Environment& env);

/// true, false, list, +, -, *, =, <, not, str, symbols.
void install_base_natives(Environment& env);

/// Environment with the special forms and base natives.
Environment standard_environment();

/// Applies a procedure to evaluated arguments in `env`, parameters
/// shadowing existing bindings for the duration of the call.
Value apply_proc(const Proc& proc, std::span<const Value> args, Environment& env, const std::string& name);

}  // namespace cvm::lang
