#include <gtest/gtest.h>

#include <barrier>
#include <thread>

#include "cvm/demo/demo.hpp"
#include "cvm/runtime/runtime.hpp"

using namespace cvm;
using lang::Value;

namespace {

struct Wired : ::testing::Test {
  Wired() {
    demo::register_demo_impls(rt);
    const auto c = rt.create_container();
    client = rt.deploy_component(c, demo::kClient);
    echo = rt.deploy_component(c, demo::kEcho);
    rt.connect(client, "out", echo, "in");
  }
  Reply ping() { return rt.send_request(client, "out", "echo", {Value::str("ping")}); }

  Runtime rt;
  ComponentId client{};
  ComponentId echo{};
};

}  // namespace

TEST_F(Wired, ChainOrderIsRegistrationOrderPerPoint) {
  std::vector<std::string> log;
  rt.interceptors().register_interceptor(PointSet::all(), [&](InterceptionPoint p, RequestInfo&) {
    log.push_back(std::string("first@") + to_string(p));
  });
  rt.interceptors().register_interceptor(PointSet::all(), [&](InterceptionPoint p, RequestInfo&) {
    log.push_back(std::string("second@") + to_string(p));
  });
  ping();
  ASSERT_EQ(log.size(), 8u);
  for (std::size_t i = 0; i < 8; i += 2) {
    EXPECT_EQ(log[i].substr(0, 6), "first@");
    EXPECT_EQ(log[i + 1].substr(0, 7), "second@");
  }
}

TEST_F(Wired, UnregisterStopsFiring) {
  int fired = 0;
  const auto id = rt.interceptors().register_interceptor(PointSet::all(),
                                                         [&](InterceptionPoint, RequestInfo&) { ++fired; });
  ping();
  EXPECT_EQ(fired, 4);
  EXPECT_TRUE(rt.interceptors().unregister_interceptor(id));
  ping();
  EXPECT_EQ(fired, 4);
  EXPECT_FALSE(rt.interceptors().unregister_interceptor(id));
  EXPECT_FALSE(rt.interceptors().unregister_interceptor(987654));
}

TEST_F(Wired, OnlyRegisteredPointsFire) {
  std::vector<InterceptionPoint> seen;
  rt.interceptors().register_interceptor(
      {InterceptionPoint::server_receive_request, InterceptionPoint::server_send_reply},
      [&](InterceptionPoint p, RequestInfo&) { seen.push_back(p); });
  ping();
  EXPECT_EQ(seen, (std::vector<InterceptionPoint>{InterceptionPoint::server_receive_request,
                                                  InterceptionPoint::server_send_reply}));
}

TEST_F(Wired, RequestInfoContents) {
  std::vector<std::string> rows;
  rt.interceptors().register_interceptor(PointSet::all(), [&](InterceptionPoint, RequestInfo& info) {
    rows.push_back(info.operation() + "|" + info.arguments() + "|" + info.target_interface() + "|" +
                   std::to_string(raw(info.sender())) + "|" + std::to_string(raw(info.target_component())) + "|" +
                   (info.response_expected() ? "true" : "false"));
  });
  ping();
  ASSERT_EQ(rows.size(), 4u);
  const std::string expected = "echo|(\"ping\")|IDL:EchoComponent:1.0|" + std::to_string(raw(client)) + "|" +
                               std::to_string(raw(echo)) + "|true";
  for (const auto& row : rows) EXPECT_EQ(row, expected);
}

TEST_F(Wired, SlotWrittenAtReceiveIsReadableAtReply) {
  std::optional<Bytes> at_reply;
  std::optional<Bytes> before_set;
  rt.interceptors().register_interceptor(PointSet::all(), [&](InterceptionPoint p, RequestInfo& info) {
    if (p == InterceptionPoint::client_send_request) before_set = info.slot_get(7);
    if (p == InterceptionPoint::server_receive_request) info.slot_set(7, Bytes{1, 2, 3});
    if (p == InterceptionPoint::server_send_reply) at_reply = info.slot_get(7);
  });
  const Reply r = ping();
  EXPECT_FALSE(before_set.has_value());
  ASSERT_TRUE(at_reply.has_value());
  EXPECT_EQ(*at_reply, (Bytes{1, 2, 3}));
  EXPECT_EQ(r.slots.at(7), (Bytes{1, 2, 3}));
}

TEST_F(Wired, EmptySlotIsAbsentNotEmpty) {
  std::optional<Bytes> got = Bytes{9};
  rt.interceptors().register_interceptor({InterceptionPoint::server_send_reply},
                                         [&](InterceptionPoint, RequestInfo& info) { got = info.slot_get(3); });
  ping();
  EXPECT_FALSE(got.has_value());
}

TEST_F(Wired, ThrowingCallbackDoesNotBreakTheRequest) {
  int later = 0;
  rt.interceptors().register_interceptor(PointSet::all(),
                                         [](InterceptionPoint, RequestInfo&) { throw std::runtime_error("x"); });
  rt.interceptors().register_interceptor(PointSet::all(), [&](InterceptionPoint, RequestInfo&) { ++later; });
  const auto before = InterceptorChain::callback_failures();
  EXPECT_TRUE(ping().ok());
  EXPECT_EQ(later, 4);
  EXPECT_EQ(InterceptorChain::callback_failures() - before, 4u);
}

// Two requests in flight at the same time each read back their own slot.
TEST_F(Wired, ConcurrentRequestsNeverShareSlots) {
  const auto c = rt.create_container();
  const auto client2 = rt.deploy_component(c, demo::kClient);
  const auto echo2 = rt.deploy_component(c, demo::kEcho);
  rt.connect(client2, "out", echo2, "in");

  std::barrier sync(2);
  std::mutex m;
  std::vector<std::pair<std::string, Bytes>> readback;
  rt.interceptors().register_interceptor(
      {InterceptionPoint::server_receive_request, InterceptionPoint::server_send_reply},
      [&](InterceptionPoint p, RequestInfo& info) {
        const auto& payload = info.arguments();
        if (p == InterceptionPoint::server_receive_request) {
          info.slot_set(7, Bytes(payload.begin(), payload.end()));
          sync.arrive_and_wait();  // both requests have written slot 7
        } else {
          std::lock_guard lock(m);
          readback.emplace_back(payload, info.slot_get(7).value_or(Bytes{}));
        }
      });
  std::thread t1([&] {
    for (int i = 0; i < 50; ++i) rt.send_request(client, "out", "echo", {Value::str("one")});
  });
  std::thread t2([&] {
    for (int i = 0; i < 50; ++i) rt.send_request(client2, "out", "echo", {Value::str("two")});
  });
  t1.join();
  t2.join();
  ASSERT_EQ(readback.size(), 100u);
  for (const auto& [args, slot] : readback) EXPECT_EQ(std::string(slot.begin(), slot.end()), args);
}
