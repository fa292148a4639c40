#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "cvm/core/cvm.hpp"
#include "cvm/crypto/cipher.hpp"
#include "cvm/demo/demo.hpp"
#include "cvm/lang/parser.hpp"
#include "cvm/lang/printer.hpp"

using namespace cvm;
using namespace cvm::core;
using namespace std::chrono_literals;
using lang::Value;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string script_path(const char* name) { return std::string(CVM_SCRIPTS_DIR) + "/" + name; }

NodeConfig test_config() {
  NodeConfig c;
  c.journal = std::filesystem::temp_directory_path() /
              ("cvm-core-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name() + ".log");
  std::filesystem::remove(c.journal);
  c.scan_interval = 20ms;
  return c;
}

struct Node : ::testing::Test {
  Node() : cvm(rt, test_config()) {}
  ~Node() override {
    cvm.stop();
    rt.shutdown_services();
    std::filesystem::remove(cvm.config().journal);
  }
  lang::FormOutcome run(const std::string& src) { return cvm.evaluate(lang::parse_one(src)); }
  Value ok(const std::string& src) {
    auto o = run(src);
    EXPECT_TRUE(o.ok) << src << ": " << o.error;
    return o.value;
  }
  Errc err(const std::string& src) {
    auto o = run(src);
    EXPECT_FALSE(o.ok) << src << " unexpectedly gave " << lang::print_value(o.value);
    return o.code;
  }
  std::vector<lang::FormOutcome> run_file(const char* name, bool keep_going = false) {
    return cvm.evaluate_script(lang::parse(read_file(script_path(name))), keep_going);
  }

  Runtime rt;
  Cvm cvm;
};

}  // namespace

TEST_F(Node, SymbolsListEveryKeyword) {
  const auto syms = ok("(symbols)").as_list();
  auto has = [&](const std::string& n) {
    return std::find(syms.begin(), syms.end(), Value::str(n)) != syms.end();
  };
  for (const auto& k : keyword_names()) EXPECT_TRUE(has(k)) << k;
  for (const char* k : {"define", "undefine", "defproc", "if", "begin", "symbols"}) EXPECT_TRUE(has(k)) << k;
  const auto snap = cvm.symbols();
  EXPECT_EQ(snap->size(), syms.size());
}

TEST_F(Node, SecondBootstrapFails) {
  try {
    Cvm again(rt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::already_bootstrapped);
  }
}

TEST_F(Node, RuntimeHandle) {
  EXPECT_EQ(ok("(get_runtime)"), Value::handle(0, lang::HandleKind::runtime));
  EXPECT_EQ(ok("(clssLoaderCCM getorb)"), Value::handle(0, lang::HandleKind::runtime));
  EXPECT_EQ(err("(clssLoaderCCM \"getorb\")"), Errc::bad_form);
}

TEST_F(Node, MonitoringScriptRunsToCompletion) {
  const auto out = run_file("monitoring.mvv");
  ASSERT_EQ(out.size(), 11u);
  for (const auto& o : out) EXPECT_TRUE(o.ok) << o.index << ": " << o.error;
  EXPECT_TRUE(out.back().value.is_unit());
  const auto mon = monitoring::Monitor::find(rt);
  ASSERT_TRUE(mon);
  EXPECT_TRUE(mon->running());
  EXPECT_EQ(mon->snapshot().metrics.size(), 1u);
  EXPECT_EQ(cvm.plugin_path().entries().size(), 2u);
}

TEST_F(Node, UnfixedScriptFailsOnLog) {
  const auto out = run_file("monitoring_unfixed.mvv");
  ASSERT_FALSE(out.empty());
  EXPECT_FALSE(out.back().ok);
  EXPECT_EQ(out.back().code, Errc::unbound_symbol);
  EXPECT_NE(out.back().error.find("unbound symbol: log"), std::string::npos);
  EXPECT_EQ(out.size(), 8u);
}

TEST_F(Node, MonitorInvokeErrorsAndIdempotence) {
  EXPECT_EQ(err("(invoke \"Monitor\" \"nope\" \"()V\")"), Errc::unknown_operation);
  EXPECT_EQ(err("(invoke \"Monitor\" \"start\" \"()V\")"), Errc::not_installed);
  const auto h1 = ok("(runCCM \"Monitor\" \"getInstance\" \"\")");
  const auto h2 = ok("(runCCM \"Monitor\" \"getInstance\" \"\")");
  EXPECT_EQ(h1, h2);
  EXPECT_EQ(h1.as_handle().kind, lang::HandleKind::service);
  EXPECT_TRUE(ok("(runCCM_arg \"Monitor\" \"start\" \"()V\")").is_unit());
  EXPECT_TRUE(ok("(runCCM_arg \"Monitor\" \"start\" \"()V\")").is_unit());
  EXPECT_TRUE(monitoring::Monitor::find(rt)->running());
  EXPECT_EQ(err("(invoke \"NoSuchClass\" \"x\" \"\")"), Errc::not_found);
}

TEST_F(Node, MetricsThroughScript) {
  ok("(define mon (invoke \"Monitor\" \"getInstance\" \"\"))");
  ok("(jrun \"EchoComponent\")");
  ok("(jrun \"Client\")");
  ok("(define c (add_container \"C\"))");
  ok("(define e (add_component c \"EchoComponent\" \"E\"))");
  const auto spec = ok("(define m (invoke \"CountMethod\" \"new\" \"\" \"EchoComponent\" \"echo\"))");
  ok("(define h (invoke \"Monitor\" \"registerMetric\" \"\" mon m))");
  for (int i = 0; i < 4; ++i) ok("(invoke e \"echo\" \"\" 1)");
  ok("(invoke \"Monitor\" \"scan\" \"\")");
  const auto rows = ok("(invoke \"Monitor\" \"snapshot\" \"\")").as_list();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].as_list()[1], Value::str("CountMethod"));
  EXPECT_EQ(rows[0].as_list()[4], Value::integer(4));
  EXPECT_EQ(ok("(invoke \"Monitor\" \"unregisterMetric\" \"\" h)"), Value::boolean(true));
  EXPECT_EQ(err("(invoke \"Monitor\" \"registerMetric\" \"\" h)"), Errc::unknown_handle);
}

TEST_F(Node, LoadImpl) {
  EXPECT_EQ(err("(add_component (add_container) \"CryptoCOS\")"), Errc::unknown_implementation);
  ok("(jrun \"CryptoCOS\")");
  ok("(load_impl \"CryptoCOS\")");
  EXPECT_TRUE(ok("(add_component (add_container) \"CryptoCOS\")").is_handle());
  ok("(add_url_classloader \"file:/somewhere/\")");
  auto o = run("(load_impl \"Missing\")");
  EXPECT_EQ(o.code, Errc::not_found);
  EXPECT_NE(o.error.find("file:/somewhere/"), std::string::npos);
}

TEST_F(Node, PluginPathIgnoresDuplicates) {
  ok("(add_plugin_path \"a\")");
  ok("(add_plugin_path \"b\")");
  ok("(add_plugin_path \"a\")");
  EXPECT_EQ(ok("(plugin_paths)"), Value::list({Value::str("a"), Value::str("b")}));
}

TEST_F(Node, RestrictionAndRestore) {
  demo::deploy_demo(rt, 0ms, 0, false);
  ok("(define a (lookup_component \"A\"))");
  ok("(define b (lookup_component \"B\"))");
  ok("(undefine connect)");
  const auto o = run("(connect a \"out\" b \"in\")");
  EXPECT_EQ(o.code, Errc::unbound_symbol);
  ok("(disconnect a \"out\")");
  EXPECT_TRUE(rt.connections()->empty());
  cvm.with_environment([&](lang::Environment& env) {
    env.define_native("connect", [&](lang::Environment&, std::span<const Value> args) {
      rt.connect(cvm.component_of(args[0]), args[1].as_str(), cvm.component_of(args[2]), args[3].as_str());
      return Value::unit();
    });
  });
  ok("(connect a \"out\" b \"in\")");
  EXPECT_EQ(rt.connections()->size(), 1u);
}

TEST_F(Node, InterposeScriptOnLiveDemo) {
  const auto topo = demo::deploy_demo(rt, 1ms, 300);
  ASSERT_TRUE(topo.app->wait_received(50, 5s));
  const auto out = run_file("interpose.mvv");
  for (const auto& o : out) ASSERT_TRUE(o.ok) << o.index << ": " << o.error;
  ASSERT_TRUE(topo.app->wait_done(10s));
  const auto msgs = topo.app->received();
  ASSERT_EQ(msgs.size(), 300u);
  std::size_t cutovers = 0;
  bool encrypted = false;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    ASSERT_EQ(msgs[i].seq, i + 1);
    const auto plain = to_hex(demo::plaintext_for(i + 1));
    const auto bytes = from_hex(msgs[i].payload_hex).value();
    const bool is_cipher = to_hex(crypto::xor_rolling(bytes, crypto::kDefaultKey)) == plain;
    ASSERT_TRUE(is_cipher || msgs[i].payload_hex == plain);
    if (is_cipher != encrypted) ++cutovers;
    encrypted = is_cipher;
  }
  EXPECT_EQ(cutovers, 1u);
  EXPECT_EQ(topo.app->failed(), 0u);
}

TEST_F(Node, InterposeKeyword) {
  const auto topo = demo::deploy_demo(rt, 0ms, 0, false);
  const auto cos = ok("(interpose \"CA\" \"A\" \"out\" \"B\" \"in\")");
  EXPECT_EQ(rt.connections()->size(), 2u);
  EXPECT_EQ(err("(interpose \"CA\" \"A\" \"out\" \"B\" \"in\")"), Errc::precondition);
  cvm.with_environment([&](lang::Environment& env) { env.define("cos", cos); });
  ok("(deinterpose cos)");
  EXPECT_EQ(rt.connections()->connections()[0], (Connection{{topo.a, "out"}, {topo.b, "in"}}));
}

TEST_F(Node, ReplaceMethodByCipherName) {
  demo::deploy_demo(rt, 0ms, 0, false);
  ok("(interpose \"CA\" \"A\" \"out\" \"B\" \"in\")");
  const auto out = run_file("adapt_cipher.mvv");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].value, Value::integer(2));
  EXPECT_EQ(out[1].value, Value::list({Value::integer(1), Value::integer(2)}));
  EXPECT_EQ(err("(replace_method \"CryptoCOS\" \"encrypt\" \"rot13\")"), Errc::not_found);
}

TEST_F(Node, ScriptDefinedImplAndMethod) {
  ok("(defproc twice (x) (+ x x))");
  ok("(defproc thrice (x) (+ x (+ x x)))");
  ok("(declare_impl \"Doubler\" (list \"in\") (list) \"run\" \"twice\")");
  EXPECT_EQ(err("(add_component (add_container) \"Doubler\")"), Errc::unknown_implementation);
  ok("(jrun \"Doubler\")");
  ok("(define d (add_component (add_container) \"Doubler\" \"D\"))");
  EXPECT_EQ(ok("(invoke d \"run\" \"(I)I\" 21)"), Value::integer(42));
  EXPECT_EQ(ok("(invoke \"Doubler\" \"run\" \"(I)I\" 5)"), Value::integer(10));
  EXPECT_EQ(ok("(replace_method \"Doubler\" \"run\" \"thrice\")"), Value::integer(2));
  EXPECT_EQ(ok("(invoke d \"run\" \"\" 5)"), Value::integer(15));
  EXPECT_EQ(err("(invoke d \"run\" \"\")"), Errc::host);
}

TEST_F(Node, RewireKeywordAtomic) {
  demo::deploy_demo(rt, 0ms, 0, false);
  ok("(jrun \"CryptoCOS\")");
  ok("(define cos (add_component \"CA\" \"CryptoCOS\"))");
  const auto before = rt.connections();
  EXPECT_EQ(err("(rewire (list \"disconnect\" \"A\" \"out\") (list \"connect\" \"A\" \"out\" cos \"nope\"))"),
            Errc::unknown_port);
  EXPECT_EQ(rt.connections(), before);
  ok("(rewire (list (list \"disconnect\" \"A\" \"out\") (list \"connect\" \"A\" \"out\" cos \"in\") "
     "(list \"connect\" cos \"out\" \"B\" \"in\")))");
  EXPECT_EQ(rt.connections()->size(), 2u);
  EXPECT_EQ(err("(rewire (list \"swap\" \"A\"))"), Errc::type);
}

TEST_F(Node, InterceptorServiceKeyword) {
  const auto h = ok("(register_interceptor_service \"noop\")");
  ok("(register_interceptor_service \"noop\" \"ServerReceiveRequest\")");
  EXPECT_EQ(rt.interceptors().size(), 2u);
  cvm.with_environment([&](lang::Environment& env) { env.define("h", h); });
  EXPECT_EQ(ok("(unregister_interceptor_service h)"), Value::boolean(true));
  EXPECT_EQ(ok("(unregister_interceptor_service h)"), Value::boolean(false));
  EXPECT_EQ(rt.interceptors().size(), 1u);
  EXPECT_EQ(err("(register_interceptor_service \"noop\" \"Sideways\")"), Errc::type);
  EXPECT_EQ(err("(register_interceptor_service \"fancy\")"), Errc::not_found);
}

TEST_F(Node, MeasureLatency) {
  const auto v = ok("(measure_latency 200)");
  ASSERT_TRUE(v.is_float());
  EXPECT_GT(v.as_float(), 0.0);
  ok("(measure_latency 10)");  // reuses the bench pair
  EXPECT_EQ(rt.components().size(), 2u);
}

TEST_F(Node, CompareLatency) {
  const auto v = ok("(compare_latency (list 0 1 4) 300 50)");
  ASSERT_EQ(v.as_list().size(), 2u);
  ASSERT_EQ(v.as_list()[0].as_list().size(), 3u);
  for (const auto& x : v.as_list()[0].as_list()) EXPECT_GT(x.as_float(), 0.0);
  EXPECT_GE(v.as_list()[1].as_int(), 0);
  EXPECT_EQ(rt.interceptors().size(), 0u) << "temporary interceptors are removed";
  EXPECT_EQ(ok("(compare_latency (list) 10)"), Value::list({Value::list({}), Value::integer(0)}));
  EXPECT_EQ(err("(compare_latency 4 10)"), Errc::type);
  EXPECT_EQ(err("(compare_latency (list -1) 10)"), Errc::type);
  EXPECT_EQ(err("(compare_latency (list 1) 0)"), Errc::type);
}

TEST_F(Node, DeployDemoKeyword) {
  const auto v = ok("(deploy_demo 0 20)");
  ASSERT_EQ(v.as_list().size(), 4u);
  EXPECT_EQ(v.as_list()[2].as_handle().kind, lang::HandleKind::component);
  EXPECT_EQ(rt.connections()->size(), 1u);
}

TEST_F(Node, ControlLoopOrderAndErrors) {
  cvm.start();
  auto f1 = cvm.submit(lang::parse_one("(define x 1)"), 0);
  auto f2 = cvm.submit(lang::parse_one("(boom)"), 1);
  auto f3 = cvm.submit(lang::parse_one("x"), 2);
  const auto r1 = f1.get();
  const auto r2 = f2.get();
  const auto r3 = f3.get();
  EXPECT_TRUE(r1.ok && r1.value.is_unit());
  EXPECT_FALSE(r2.ok);
  EXPECT_EQ(r2.code, Errc::unbound_symbol);
  EXPECT_TRUE(r3.ok);
  EXPECT_EQ(r3.value, Value::integer(1));
  EXPECT_EQ(r3.index, 2u);
}

TEST(NodeQueue, SubmitBlocksWhenQueueIsFull) {
  Runtime rt;
  NodeConfig cfg;
  cfg.queue_capacity = 2;
  Cvm cvm(rt, cfg);
  std::atomic<bool> release{false};
  std::atomic<bool> entered{false};
  cvm.with_environment([&](lang::Environment& env) {
    env.define_native("hold", [&](lang::Environment&, std::span<const Value>) {
      entered = true;
      while (!release) std::this_thread::sleep_for(1ms);
      return Value::unit();
    });
  });
  cvm.start();
  auto first = cvm.submit(lang::parse_one("(hold)"));
  while (!entered) std::this_thread::sleep_for(1ms);
  auto q1 = cvm.submit(lang::parse_one("1"));
  auto q2 = cvm.submit(lang::parse_one("2"));
  std::atomic<bool> third_queued{false};
  std::thread t([&] {
    auto f = cvm.submit(lang::parse_one("3"));
    third_queued = true;
    EXPECT_EQ(f.get().value, Value::integer(3));
  });
  std::this_thread::sleep_for(50ms);
  EXPECT_FALSE(third_queued.load());
  EXPECT_EQ(cvm.queued(), 2u);
  release = true;
  t.join();
  EXPECT_TRUE(third_queued.load());
  EXPECT_EQ(q2.get().value, Value::integer(2));
}

TEST(NodeQueue, StopFailsQueuedForms) {
  Runtime rt;
  Cvm cvm(rt);
  EXPECT_THROW(cvm.submit(lang::parse_one("1")), Error);
  cvm.start();
  EXPECT_EQ(cvm.submit(lang::parse_one("1")).get().value, Value::integer(1));
  cvm.stop();
  EXPECT_FALSE(cvm.running());
  EXPECT_THROW(cvm.submit(lang::parse_one("1")), Error);
}

// Application traffic keeps flowing while the control context evaluates.
TEST_F(Node, TrafficContinuesDuringEvaluation) {
  const auto topo = demo::deploy_demo(rt, 0ms, 2000);
  cvm.start();
  for (int i = 0; i < 50; ++i) {
    auto f = cvm.submit(lang::parse_one("(symbols)"));
    ASSERT_TRUE(f.get().ok);
  }
  ASSERT_TRUE(topo.app->wait_done(10s));
  EXPECT_EQ(topo.app->failed(), 0u);
}
