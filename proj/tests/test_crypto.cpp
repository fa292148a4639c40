#include <gtest/gtest.h>

#include <random>

#include "cvm/crypto/cos.hpp"
#include "cvm/demo/demo.hpp"

using namespace cvm;
using lang::Value;

namespace {

Bytes text(std::string_view s) { return Bytes(s.begin(), s.end()); }

struct CosFixture : ::testing::Test {
  CosFixture() {
    demo::register_demo_impls(rt);
    rt.register_impl(crypto::cos_impl());
    ca = rt.create_container("CA");
    cb = rt.create_container("CB");
    a = rt.deploy_component(ca, demo::kEmitter, {}, "A");
    b = rt.deploy_component(cb, demo::kReceiver, {}, "B");
    rt.connect(a, "out", b, "in");
    log = demo::receiver_log(rt, b);
  }
  Reply send(std::int64_t seq, std::string_view plain) {
    return rt.send_request(a, "out", "send", {Value::integer(seq), Value::str(to_hex(plain))});
  }
  Errc code_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return Errc::host;
  }

  Runtime rt;
  ContainerId ca{}, cb{};
  ComponentId a{}, b{};
  std::shared_ptr<demo::ReceiverLog> log;
};

}  // namespace

TEST(Cipher, XorRoundTripProperty) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    Bytes m(rng() % 64), key(1 + rng() % 8);
    for (auto& x : m) x = static_cast<std::uint8_t>(rng());
    for (auto& x : key) x = static_cast<std::uint8_t>(rng());
    const auto spec = crypto::CipherSpec::xor_rolling(key);
    ASSERT_EQ(spec.open(spec.seal(m)), m);
    const auto shift = crypto::CipherSpec::caesar(static_cast<int>(rng() % 512) - 256);
    ASSERT_EQ(shift.open(shift.seal(m)), m);
  }
}

TEST(Cipher, SingleByteXorIsAnInvolution) {
  const Bytes key{0x5A};
  const Bytes m = text("hello world");
  EXPECT_EQ(crypto::xor_rolling(crypto::xor_rolling(m, key), key), m);
}

TEST(Cipher, CaesarShiftsBytes) {
  EXPECT_EQ(crypto::caesar(text("abc"), 3), text("def"));
  EXPECT_EQ(crypto::caesar(Bytes{0xFF}, 1), Bytes{0x00});
  EXPECT_TRUE(crypto::cipher_by_name("caesar3"));
  EXPECT_FALSE(crypto::cipher_by_name("caesar"));
  EXPECT_FALSE(crypto::cipher_by_name("rot13"));
}

TEST_F(CosFixture, ZeroKeyLeavesPayloadUnchanged) {
  const std::vector<Value> zero_key{Value::str("0000")};
  crypto::interpose(rt, ca, {a, "out"}, {b, "in"}, crypto::kCosImplName, zero_key);
  ASSERT_TRUE(send(1, "hello").ok());
  ASSERT_EQ(log->size(), 1u);
  EXPECT_EQ(log->messages()[0].payload_hex, to_hex("hello"));
}

TEST_F(CosFixture, DownstreamDecryptRecoversPlaintext) {
  crypto::interpose(rt, ca, {a, "out"}, {b, "in"});
  ASSERT_TRUE(send(1, "hello").ok());
  const auto received = from_hex(log->messages().at(0).payload_hex).value();
  EXPECT_NE(received, text("hello"));
  EXPECT_EQ(crypto::xor_rolling(received, crypto::kDefaultKey), text("hello"));
}

TEST_F(CosFixture, ReplacingEncryptWithCaesar) {
  const auto cos = crypto::interpose(rt, ca, {a, "out"}, {b, "in"});
  const auto v = rt.replace_method(crypto::kCosImplName, "encrypt", crypto::encrypt_method("caesar3"));
  EXPECT_EQ(v, 2u);
  ASSERT_TRUE(send(7, "abc").ok());
  EXPECT_EQ(log->messages().at(0).payload_hex, to_hex("def"));
  EXPECT_EQ(log->messages().at(0).seq, 7u);
  EXPECT_EQ(rt.method_versions(crypto::kCosImplName, "encrypt"), (std::vector<std::uint32_t>{1, 2}));
  (void)cos;
}

TEST_F(CosFixture, SetKeyChangesCipher) {
  const auto cos = crypto::interpose(rt, ca, {a, "out"}, {b, "in"});
  ASSERT_TRUE(rt.invoke_direct(cos, "set_key", {Value::str("00")}).ok());
  ASSERT_TRUE(send(1, "same").ok());
  EXPECT_EQ(log->messages().at(0).payload_hex, to_hex("same"));
}

TEST_F(CosFixture, ForwardingWithUnboundOutIsAnExceptionReply) {
  const auto cos = rt.deploy_component(ca, crypto::kCosImplName);
  const Reply r = rt.invoke_direct(cos, "send", {Value::integer(1), Value::str("00")});
  EXPECT_EQ(r.status, ReplyStatus::exception);
  EXPECT_NE(r.error.find("not connected"), std::string::npos);
}

TEST_F(CosFixture, InterposePreconditions) {
  rt.disconnect(a, "out");
  const auto before = rt.components().size();
  EXPECT_EQ(code_of([&] { crypto::interpose(rt, ca, {a, "out"}, {b, "in"}); }), Errc::precondition);
  EXPECT_EQ(rt.components().size(), before);

  rt.connect(a, "out", b, "in");
  crypto::interpose(rt, ca, {a, "out"}, {b, "in"});
  const auto after_first = rt.components().size();
  EXPECT_EQ(code_of([&] { crypto::interpose(rt, ca, {a, "out"}, {b, "in"}); }), Errc::precondition);
  EXPECT_EQ(rt.components().size(), after_first);
}

TEST_F(CosFixture, DeinterposeRestoresOriginalTable) {
  const auto original = rt.connections()->connections();
  const auto cos = crypto::interpose(rt, ca, {a, "out"}, {b, "in"});
  EXPECT_EQ(rt.connections()->size(), 2u);
  crypto::deinterpose(rt, cos);
  EXPECT_EQ(rt.connections()->connections(), original);
  EXPECT_FALSE(rt.has_component(cos));
  EXPECT_EQ(code_of([&] { crypto::deinterpose(rt, cos); }), Errc::unknown_component);
  EXPECT_EQ(code_of([&] { crypto::deinterpose(rt, a); }), Errc::precondition);
}

TEST_F(CosFixture, DeinterposeIsShapeBased) {
  // Any 1-in/1-out component qualifies, not only a CryptoCOS.
  auto relay = std::make_shared<ComponentImpl>("Relay");
  relay->facet("in").receptacle("out").operation("send", [](CallContext& ctx, std::span<const Value> args) {
    return ctx.send("out", "send", {args.begin(), args.end()}).payload;
  });
  rt.register_impl(relay);
  const auto r = crypto::interpose(rt, ca, {a, "out"}, {b, "in"}, "Relay");
  ASSERT_TRUE(send(1, "x").ok());
  EXPECT_EQ(log->messages().at(0).payload_hex, to_hex("x"));
  crypto::deinterpose(rt, r);
  EXPECT_EQ(rt.connections()->size(), 1u);
}
