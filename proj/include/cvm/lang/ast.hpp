#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cvm::lang {

struct Symbol {
  std::string name;
};

struct Str {
  std::string value;
};

// Syntax tree of the reconfiguration language. It is also the unit shipped
// over the admin channel, so it is a plain immutable value.
class AstNode {
 public:
  using List = std::vector<AstNode>;
  using Variant = std::variant<Symbol, Str, std::int64_t, double, List>;

  AstNode() : v_(List{}) {}

  static AstNode symbol(std::string name) { return AstNode(Variant(Symbol{std::move(name)})); }
  static AstNode str(std::string value) { return AstNode(Variant(Str{std::move(value)})); }
  static AstNode integer(std::int64_t value) { return AstNode(Variant(std::in_place_type<std::int64_t>, value)); }
  static AstNode floating(double value) { return AstNode(Variant(std::in_place_type<double>, value)); }
  static AstNode list(List children = {}) { return AstNode(Variant(std::move(children))); }

  bool is_symbol() const noexcept { return std::holds_alternative<Symbol>(v_); }
  bool is_str() const noexcept { return std::holds_alternative<Str>(v_); }
  bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const noexcept { return std::holds_alternative<double>(v_); }
  bool is_list() const noexcept { return std::holds_alternative<List>(v_); }

  const std::string& symbol_name() const { return std::get<Symbol>(v_).name; }
  const std::string& str_value() const { return std::get<Str>(v_).value; }
  std::int64_t int_value() const { return std::get<std::int64_t>(v_); }
  double float_value() const { return std::get<double>(v_); }
  const List& children() const { return std::get<List>(v_); }

  const Variant& variant() const noexcept { return v_; }

  /// Structural equality; floats compare by bit pattern so NaN payloads and
  /// signed zeros round-trip observably.
  friend bool operator==(const AstNode& a, const AstNode& b) noexcept;

 private:
  explicit AstNode(Variant v) : v_(std::move(v)) {}

  Variant v_;
};

struct Script {
  std::vector<AstNode> forms;
};

/// Symbol names are non-empty and free of whitespace, parentheses, double
/// quotes and the comment character.
bool is_valid_symbol_name(std::string_view name) noexcept;

}  // namespace cvm::lang
