#include "cvm/lang/codec.hpp"

#include <bit>
#include <fmt/format.h>

namespace cvm::lang {

void encode_ast_to(Bytes& out, const AstNode& node) {
  switch (node.variant().index()) {
    case 0:
    case 1: {
      const std::string& text = node.is_symbol() ? node.symbol_name() : node.str_value();
      out.push_back(node.is_symbol() ? tag::kSymbol : tag::kStr);
      put_u32_be(out, static_cast<std::uint32_t>(text.size()));
      out.insert(out.end(), text.begin(), text.end());
      break;
    }
    case 2:
      out.push_back(tag::kInt);
      put_u64_be(out, static_cast<std::uint64_t>(node.int_value()));
      break;
    case 3:
      out.push_back(tag::kFloat);
      put_u64_be(out, std::bit_cast<std::uint64_t>(node.float_value()));
      break;
    default:
      out.push_back(tag::kList);
      put_u32_be(out, static_cast<std::uint32_t>(node.children().size()));
      for (const auto& child : node.children()) encode_ast_to(out, child);
      break;
  }
}

Bytes encode_ast(const AstNode& node) {
  Bytes out;
  encode_ast_to(out, node);
  return out;
}

namespace {

// Smallest possible encoded node (empty Str or empty List).
constexpr std::size_t kMinNodeSize = 5;
constexpr std::size_t kMaxDepth = 512;

class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> in) : in_(in) {}

  AstNode node(std::size_t depth) {
    if (depth > kMaxDepth) throw DecodeError(DecodeErrc::too_deep, pos_, "nesting too deep");
    need(1, "tag");
    const std::size_t tag_at = pos_;
    const std::uint8_t t = in_[pos_++];
    switch (t) {
      case tag::kSymbol:
      case tag::kStr: {
        need(4, "length");
        const std::uint32_t len = get_u32_be(&in_[pos_]);
        pos_ += 4;
        if (len > remaining()) {
          throw DecodeError(DecodeErrc::truncated, pos_,
                            fmt::format("truncated payload: {} bytes declared, {} present", len, remaining()));
        }
        std::string text(reinterpret_cast<const char*>(&in_[pos_]), len);
        if (!is_valid_utf8(text)) throw DecodeError(DecodeErrc::invalid_utf8, pos_, "invalid UTF-8");
        pos_ += len;
        if (t == tag::kStr) return AstNode::str(std::move(text));
        if (!is_valid_symbol_name(text)) {
          throw DecodeError(DecodeErrc::invalid_symbol, tag_at, fmt::format("invalid symbol name \"{}\"", text));
        }
        return AstNode::symbol(std::move(text));
      }
      case tag::kInt: {
        need(8, "int");
        const auto v = static_cast<std::int64_t>(get_u64_be(&in_[pos_]));
        pos_ += 8;
        return AstNode::integer(v);
      }
      case tag::kFloat: {
        need(8, "float");
        const auto v = std::bit_cast<double>(get_u64_be(&in_[pos_]));
        pos_ += 8;
        return AstNode::floating(v);
      }
      case tag::kList: {
        need(4, "count");
        const std::uint32_t count = get_u32_be(&in_[pos_]);
        pos_ += 4;
        if (std::uint64_t{count} * kMinNodeSize > remaining()) {
          throw DecodeError(DecodeErrc::length_exceeds_input, pos_,
                            fmt::format("list declares {} children but only {} bytes remain", count, remaining()));
        }
        AstNode::List children;
        children.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) children.push_back(node(depth + 1));
        return AstNode::list(std::move(children));
      }
      default:
        throw DecodeError(DecodeErrc::unknown_tag, tag_at, fmt::format("unknown tag 0x{:02x}", t));
    }
  }

  std::size_t consumed() const noexcept { return pos_; }

 private:
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw DecodeError(DecodeErrc::truncated, pos_,
                        fmt::format("truncated payload: {} needs {} bytes, {} present", what, n, remaining()));
    }
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::pair<AstNode, std::size_t> decode_ast(std::span<const std::uint8_t> bytes) {
  Decoder d(bytes);
  AstNode node = d.node(0);
  return {std::move(node), d.consumed()};
}

}  // namespace cvm::lang
