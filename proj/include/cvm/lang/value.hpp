#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cvm/lang/ast.hpp"

namespace cvm::lang {

// Kind tag carried by handles. The numeric codes appear on the wire.
enum class HandleKind : std::uint8_t {
  runtime = 1,
  container = 2,
  component = 3,
  service = 4,
  metric = 5,
  interceptor = 6,
};

std::string_view to_string(HandleKind kind) noexcept;

struct Unit {
  friend bool operator==(Unit, Unit) noexcept { return true; }
};

struct Handle {
  std::uint64_t id = 0;
  HandleKind kind = HandleKind::runtime;
  friend bool operator==(const Handle&, const Handle&) noexcept = default;
};

class Value {
 public:
  using List = std::vector<Value>;
  using Variant = std::variant<Unit, bool, std::int64_t, double, std::string, Handle, List>;

  Value() = default;

  static Value unit() { return Value(); }
  static Value boolean(bool b) { return Value(Variant(std::in_place_type<bool>, b)); }
  static Value integer(std::int64_t i) { return Value(Variant(std::in_place_type<std::int64_t>, i)); }
  static Value floating(double d) { return Value(Variant(std::in_place_type<double>, d)); }
  static Value str(std::string s) { return Value(Variant(std::in_place_type<std::string>, std::move(s))); }
  static Value handle(std::uint64_t id, HandleKind kind) {
    return Value(Variant(std::in_place_type<Handle>, Handle{id, kind}));
  }
  static Value list(List items) { return Value(Variant(std::in_place_type<List>, std::move(items))); }

  bool is_unit() const noexcept { return std::holds_alternative<Unit>(v_); }
  bool is_bool() const noexcept { return std::holds_alternative<bool>(v_); }
  bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const noexcept { return std::holds_alternative<double>(v_); }
  bool is_str() const noexcept { return std::holds_alternative<std::string>(v_); }
  bool is_handle() const noexcept { return std::holds_alternative<Handle>(v_); }
  bool is_list() const noexcept { return std::holds_alternative<List>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  const std::string& as_str() const { return std::get<std::string>(v_); }
  const Handle& as_handle() const { return std::get<Handle>(v_); }
  const List& as_list() const { return std::get<List>(v_); }

  const Variant& variant() const noexcept { return v_; }

  /// Unit and Bool false are falsy; everything else is truthy.
  bool truthy() const noexcept;

  friend bool operator==(const Value& a, const Value& b) noexcept;

 private:
  explicit Value(Variant v) : v_(std::move(v)) {}

  Variant v_;
};

// Wire/printing form of a value: Unit -> (), Bool -> true/false symbols,
// Handle -> (handle <kind-code> <id>), lists element-wise.
AstNode value_to_ast(const Value& value);

/// print(value_to_ast(value)).
std::string print_value(const Value& value);

}  // namespace cvm::lang
