#include "cvm/lang/eval.hpp"

#include <fmt/format.h>

#include <optional>
#include <set>
#include <utility>

#include "cvm/lang/printer.hpp"

namespace cvm::lang {

namespace {

thread_local std::size_t eval_depth = 0;

struct DepthGuard {
  explicit DepthGuard(const AstNode& form) {
    if (++eval_depth > kMaxEvalDepth) {
      --eval_depth;
      throw EvalError(Errc::recursion_limit, "evaluation nested too deeply", print(form));
    }
  }
  ~DepthGuard() { --eval_depth; }
  DepthGuard(const DepthGuard&) = delete;
  DepthGuard& operator=(const DepthGuard&) = delete;
};

[[noreturn]] void bad_form(const std::string& message, std::span<const AstNode> operands, const char* head) {
  AstNode::List all{AstNode::symbol(head)};
  all.insert(all.end(), operands.begin(), operands.end());
  throw EvalError(Errc::bad_form, message, print(AstNode::list(std::move(all))));
}

Value apply(const AstNode& form, Environment& env) {
  const auto& items = form.children();
  const AstNode& head = items.front();
  const std::span<const AstNode> operands(items.data() + 1, items.size() - 1);

  if (!head.is_symbol()) {
    // A non-symbol head evaluates to a plain value, which is never callable.
    (void)eval(head, env);
    throw EvalError(Errc::not_callable, "head is not callable", print(form));
  }
  const std::string& name = head.symbol_name();
  const Binding* binding = env.find(name);
  if (binding == nullptr) throw EvalError(Errc::unbound_symbol, "unbound symbol: " + name, print(form));

  if (std::holds_alternative<Value>(*binding)) {
    throw EvalError(Errc::not_callable, fmt::format("'{}' is not callable", name), print(form));
  }

  // Copy the callee first: evaluating arguments may rebind its name.
  const Binding callee = *binding;
  try {
    if (const auto* special = std::get_if<Special>(&callee)) return special->fn(env, operands);

    std::vector<Value> args;
    args.reserve(operands.size());
    for (const auto& operand : operands) args.push_back(eval(operand, env));
    if (const auto* native = std::get_if<Native>(&callee)) return native->fn(env, args);
    return apply_proc(std::get<Proc>(callee), args, env, name);
  } catch (const EvalError&) {
    throw;
  } catch (const Error& e) {
    throw EvalError(e.code(), e.what(), print(form));
  } catch (const std::exception& e) {
    throw EvalError(Errc::host, e.what(), print(form));
  }
}

// Restores shadowed bindings when a procedure call ends.
class ParamScope {
 public:
  ParamScope(Environment& env, const std::vector<std::string>& params, std::span<const Value> args) : env_(env) {
    saved_.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Binding* old = env.find(params[i]);
      saved_.emplace_back(params[i], old ? std::optional<Binding>(*old) : std::nullopt);
      env.define(params[i], args[i]);
    }
  }
  ~ParamScope() {
    for (auto& [name, old] : saved_) {
      if (old) {
        env_.define(name, std::move(*old));
      } else {
        env_.undefine(name);
      }
    }
  }
  ParamScope(const ParamScope&) = delete;
  ParamScope& operator=(const ParamScope&) = delete;

 private:
  Environment& env_;
  std::vector<std::pair<std::string, std::optional<Binding>>> saved_;
};

Value arith(std::span<const Value> args, const char* op, std::int64_t (*iop)(std::int64_t, std::int64_t, bool&),
            double (*fop)(double, double)) {
  if (args.empty()) throw Error(Errc::arity, fmt::format("{} expects at least one argument", op));
  if (args[0].is_int()) {
    std::int64_t acc = args[0].as_int();
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (!args[i].is_int()) throw Error(Errc::type, fmt::format("{}: cannot mix Int and non-Int", op));
      bool overflow = false;
      acc = iop(acc, args[i].as_int(), overflow);
      if (overflow) throw Error(Errc::type, fmt::format("{}: integer overflow", op));
    }
    return Value::integer(acc);
  }
  if (args[0].is_float()) {
    double acc = args[0].as_float();
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (!args[i].is_float()) throw Error(Errc::type, fmt::format("{}: cannot mix Float and non-Float", op));
      acc = fop(acc, args[i].as_float());
    }
    return Value::floating(acc);
  }
  throw Error(Errc::type, fmt::format("{} expects numbers", op));
}

}  // namespace

Value eval(const AstNode& form, Environment& env) {
  DepthGuard guard(form);
  switch (form.variant().index()) {
    case 0: {
      const Binding* binding = env.find(form.symbol_name());
      if (binding == nullptr) {
        throw EvalError(Errc::unbound_symbol, "unbound symbol: " + form.symbol_name(), print(form));
      }
      if (const auto* value = std::get_if<Value>(binding)) return *value;
      throw EvalError(Errc::not_a_value, fmt::format("'{}' names an operation, not a value", form.symbol_name()),
                      print(form));
    }
    case 1: return Value::str(form.str_value());
    case 2: return Value::integer(form.int_value());
    case 3: return Value::floating(form.float_value());
    default:
      if (form.children().empty()) return Value::unit();
      return apply(form, env);
  }
}

Value apply_proc(const Proc& proc, std::span<const Value> args, Environment& env, const std::string& name) {
  if (args.size() != proc.params.size()) {
    throw Error(Errc::arity, fmt::format("{} expects {} argument(s), got {}", name, proc.params.size(), args.size()));
  }
  ParamScope scope(env, proc.params, args);
  Value result;
  for (const auto& form : proc.body) result = eval(form, env);
  return result;
}

FormOutcome eval_form(const AstNode& form, Environment& env, std::size_t index) {
  FormOutcome outcome;
  outcome.index = index;
  try {
    outcome.value = eval(form, env);
    outcome.ok = true;
  } catch (const Error& e) {
    outcome.code = e.code();
    outcome.error = e.what();
  } catch (const std::exception& e) {
    outcome.code = Errc::host;
    outcome.error = e.what();
  }
  return outcome;
}

std::vector<FormOutcome> eval_script(const Script& script, Environment& env, bool keep_going) {
  std::vector<FormOutcome> outcomes;
  outcomes.reserve(script.forms.size());
  for (std::size_t i = 0; i < script.forms.size(); ++i) {
    outcomes.push_back(eval_form(script.forms[i], env, i));
    if (!outcomes.back().ok && !keep_going) break;
  }
  return outcomes;
}

void install_special_forms(Environment& env) {
  env.define_special("define", [](Environment& e, std::span<const AstNode> ops) {
    if (ops.size() != 2 || !ops[0].is_symbol()) bad_form("expected (define name form)", ops, "define");
    Value value = eval(ops[1], e);
    e.define(ops[0].symbol_name(), std::move(value));
    return Value::unit();
  });
  env.define_special("undefine", [](Environment& e, std::span<const AstNode> ops) {
    if (ops.size() != 1 || !ops[0].is_symbol()) bad_form("expected (undefine name)", ops, "undefine");
    e.undefine(ops[0].symbol_name());
    return Value::unit();
  });
  env.define_special("defproc", [](Environment& e, std::span<const AstNode> ops) {
    if (ops.size() < 2 || !ops[0].is_symbol() || !ops[1].is_list()) {
      bad_form("expected (defproc name (params...) body...)", ops, "defproc");
    }
    Proc proc;
    std::set<std::string> seen;
    for (const auto& p : ops[1].children()) {
      if (!p.is_symbol() || !seen.insert(p.symbol_name()).second) {
        bad_form("parameters must be distinct symbols", ops, "defproc");
      }
      proc.params.push_back(p.symbol_name());
    }
    proc.body.assign(ops.begin() + 2, ops.end());
    e.define(ops[0].symbol_name(), std::move(proc));
    return Value::unit();
  });
  env.define_special("if", [](Environment& e, std::span<const AstNode> ops) {
    if (ops.size() != 2 && ops.size() != 3) bad_form("expected (if cond then [else])", ops, "if");
    if (eval(ops[0], e).truthy()) return eval(ops[1], e);
    return ops.size() == 3 ? eval(ops[2], e) : Value::unit();
  });
  env.define_special("begin", [](Environment& e, std::span<const AstNode> ops) {
    Value result;
    for (const auto& form : ops) result = eval(form, e);
    return result;
  });
}

void install_base_natives(Environment& env) {
  env.define("true", Value::boolean(true));
  env.define("false", Value::boolean(false));
  env.define_native("list", [](Environment&, std::span<const Value> args) {
    return Value::list(Value::List(args.begin(), args.end()));
  });
  env.define_native("+", [](Environment&, std::span<const Value> args) {
    return arith(
        args, "+",
        [](std::int64_t a, std::int64_t b, bool& ovf) {
          std::int64_t r = 0;
          ovf = __builtin_add_overflow(a, b, &r);
          return r;
        },
        [](double a, double b) { return a + b; });
  });
  env.define_native("-", [](Environment&, std::span<const Value> args) {
    if (args.size() == 1 && args[0].is_int()) {
      if (args[0].as_int() == INT64_MIN) throw Error(Errc::type, "-: integer overflow");
      return Value::integer(-args[0].as_int());
    }
    if (args.size() == 1 && args[0].is_float()) return Value::floating(-args[0].as_float());
    return arith(
        args, "-",
        [](std::int64_t a, std::int64_t b, bool& ovf) {
          std::int64_t r = 0;
          ovf = __builtin_sub_overflow(a, b, &r);
          return r;
        },
        [](double a, double b) { return a - b; });
  });
  env.define_native("*", [](Environment&, std::span<const Value> args) {
    return arith(
        args, "*",
        [](std::int64_t a, std::int64_t b, bool& ovf) {
          std::int64_t r = 0;
          ovf = __builtin_mul_overflow(a, b, &r);
          return r;
        },
        [](double a, double b) { return a * b; });
  });
  env.define_native("=", [](Environment&, std::span<const Value> args) {
    if (args.size() != 2) throw Error(Errc::arity, "= expects 2 arguments");
    return Value::boolean(args[0] == args[1]);
  });
  env.define_native("<", [](Environment&, std::span<const Value> args) {
    if (args.size() != 2) throw Error(Errc::arity, "< expects 2 arguments");
    if (args[0].is_int() && args[1].is_int()) return Value::boolean(args[0].as_int() < args[1].as_int());
    if (args[0].is_float() && args[1].is_float()) return Value::boolean(args[0].as_float() < args[1].as_float());
    throw Error(Errc::type, "< expects two Ints or two Floats");
  });
  env.define_native("not", [](Environment&, std::span<const Value> args) {
    if (args.size() != 1) throw Error(Errc::arity, "not expects 1 argument");
    return Value::boolean(!args[0].truthy());
  });
  env.define_native("str", [](Environment&, std::span<const Value> args) {
    std::string out;
    for (const auto& a : args) out += a.is_str() ? a.as_str() : print_value(a);
    return Value::str(std::move(out));
  });
  env.define_native("symbols", [](Environment& e, std::span<const Value> args) {
    if (!args.empty()) throw Error(Errc::arity, "symbols expects no arguments");
    Value::List names;
    for (auto& name : e.list_symbols()) names.push_back(Value::str(std::move(name)));
    return Value::list(std::move(names));
  });
}

Environment standard_environment() {
  Environment env;
  install_special_forms(env);
  install_base_natives(env);
  return env;
}

}  // namespace cvm::lang
