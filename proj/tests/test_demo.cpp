#include <gtest/gtest.h>

#include "cvm/demo/demo.hpp"

using namespace cvm;
using namespace std::chrono_literals;

TEST(Demo, BaselineDeliversEveryMessageInOrder) {
  Runtime rt;
  const auto topo = demo::deploy_demo(rt, 0ms, 100);
  ASSERT_TRUE(topo.app->wait_done(10s));
  const auto msgs = topo.app->received();
  ASSERT_EQ(msgs.size(), 100u);
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    EXPECT_EQ(msgs[i].seq, i + 1);
    EXPECT_EQ(msgs[i].payload_hex, to_hex(demo::plaintext_for(i + 1)));
  }
  EXPECT_EQ(topo.app->failed(), 0u);
}

TEST(Demo, TopologyMatchesFigure) {
  Runtime rt;
  const auto topo = demo::deploy_demo(rt, 1ms, 5, /*start=*/false);
  EXPECT_EQ(rt.find_component("A"), topo.a);
  EXPECT_EQ(rt.find_container("CB"), topo.cb);
  const auto conns = rt.connections()->connections();
  ASSERT_EQ(conns.size(), 1u);
  EXPECT_EQ(conns[0], (Connection{{topo.a, "out"}, {topo.b, "in"}}));
}

TEST(Demo, TwoDeploymentsAreIndependent) {
  Runtime rt;
  const auto one = demo::deploy_demo(rt, 0ms, 10);
  const auto two = demo::deploy_demo(rt, 0ms, 20);
  ASSERT_TRUE(one.app->wait_done(5s));
  ASSERT_TRUE(two.app->wait_done(5s));
  const auto topo = rt.topology();
  EXPECT_EQ(topo.containers.size(), 4u);
  EXPECT_EQ(topo.components.size(), 4u);
  EXPECT_EQ(topo.connections.size(), 2u);
  EXPECT_EQ(one.app->received().size(), 10u);
  EXPECT_EQ(two.app->received().size(), 20u);
  EXPECT_THROW(rt.find_component("A"), Error);  // ambiguous now
}

TEST(Demo, ShutdownStopsEmission) {
  Runtime rt;
  const auto topo = demo::deploy_demo(rt, 5ms, 100000);
  ASSERT_TRUE(topo.app->wait_received(3, 5s));
  rt.shutdown_services();
  const auto n = topo.app->sent();
  std::this_thread::sleep_for(20ms);
  EXPECT_EQ(topo.app->sent(), n);
  EXPECT_LT(n, 100000u);
}
