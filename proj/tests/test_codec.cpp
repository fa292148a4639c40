#include <gtest/gtest.h>

#include <random>

#include "ast_generator.hpp"
#include "cvm/lang/codec.hpp"

using namespace cvm;
using namespace cvm::lang;

namespace {
Bytes bytes(std::initializer_list<int> b) {
  Bytes out;
  for (int x : b) out.push_back(static_cast<std::uint8_t>(x));
  return out;
}

DecodeErrc decode_error_kind(const Bytes& in) {
  try {
    decode_ast(in);
  } catch (const DecodeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a decode error";
  return DecodeErrc::too_deep;
}
}  // namespace

TEST(Encode, GoldenBytes) {
  EXPECT_EQ(encode_ast(AstNode::symbol("x")), bytes({0x01, 0x00, 0x00, 0x00, 0x01, 0x78}));
  EXPECT_EQ(encode_ast(AstNode::integer(0)), bytes({0x03, 0, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(encode_ast(AstNode::list({AstNode::symbol("x")})),
            bytes({0x05, 0x00, 0x00, 0x00, 0x01, 0x01, 0x00, 0x00, 0x00, 0x01, 0x78}));
  EXPECT_EQ(encode_ast(AstNode::integer(-1)), bytes({0x03, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff}));
  EXPECT_EQ(encode_ast(AstNode::floating(1.0)), bytes({0x04, 0x3f, 0xf0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(encode_ast(AstNode::str("")), bytes({0x02, 0, 0, 0, 0}));
}

TEST(Decode, ConsumesExactlyOneNode) {
  Bytes in = encode_ast(AstNode::symbol("x"));
  in.push_back(0xAA);
  in.push_back(0xBB);
  const auto [node, used] = decode_ast(in);
  EXPECT_EQ(node, AstNode::symbol("x"));
  EXPECT_EQ(used, 6u);
}

TEST(DecodeErrors, DistinctKinds) {
  EXPECT_EQ(decode_error_kind(bytes({0x07, 0x00})), DecodeErrc::unknown_tag);
  EXPECT_EQ(decode_error_kind(bytes({0x02, 0x00, 0x00, 0x00, 0x05, 0x41})), DecodeErrc::truncated);
  EXPECT_EQ(decode_error_kind(bytes({0x03, 0x00})), DecodeErrc::truncated);
  EXPECT_EQ(decode_error_kind(bytes({})), DecodeErrc::truncated);
  EXPECT_EQ(decode_error_kind(bytes({0x02, 0x00, 0x00, 0x00, 0x01, 0xff})), DecodeErrc::invalid_utf8);
  EXPECT_EQ(decode_error_kind(bytes({0x05, 0xff, 0xff, 0xff, 0xff, 0x01})), DecodeErrc::length_exceeds_input);
  EXPECT_EQ(decode_error_kind(bytes({0x01, 0x00, 0x00, 0x00, 0x01, 0x28})), DecodeErrc::invalid_symbol);
  EXPECT_EQ(decode_error_kind(bytes({0x01, 0x00, 0x00, 0x00, 0x00})), DecodeErrc::invalid_symbol);
}

TEST(DecodeErrors, UnknownTagMessage) {
  try {
    decode_ast(bytes({0x09}));
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_STREQ(e.what(), "unknown tag 0x09");
    EXPECT_EQ(e.code(), Errc::decode);
  }
}

TEST(DecodeErrors, DeepNestingIsRejectedNotCrashed) {
  Bytes in;
  for (int i = 0; i < 100000; ++i) {
    in.push_back(0x05);
    put_u32_be(in, 1);
  }
  in.push_back(0x05);
  put_u32_be(in, 0);
  EXPECT_EQ(decode_error_kind(in), DecodeErrc::too_deep);
}

TEST(Property, RoundTripThousandNodeTree) {
  std::mt19937_64 rng(1000);
  const AstNode tree = testgen::random_tree(rng, 1000, /*finite_floats=*/false);
  EXPECT_GE(testgen::count_nodes(tree), 900u);
  const Bytes enc = encode_ast(tree);
  const auto [back, used] = decode_ast(enc);
  EXPECT_EQ(back, tree);
  EXPECT_EQ(used, enc.size());
}

TEST(Property, RoundTripRandomTrees) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const AstNode tree = testgen::random_tree(rng, 1 + static_cast<int>(rng() % 80), false);
    const Bytes enc = encode_ast(tree);
    const auto [back, used] = decode_ast(enc);
    ASSERT_EQ(back, tree);
    ASSERT_EQ(used, enc.size());
  }
}

// Every strict prefix of a valid encoding fails to decode; it never yields
// a different tree.
TEST(Property, PrefixesNeverDecode) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const Bytes enc = encode_ast(testgen::random_tree(rng, 20, false));
    for (std::size_t n = 0; n < enc.size(); ++n) {
      EXPECT_THROW(decode_ast(std::span(enc.data(), n)), DecodeError);
    }
  }
}
