#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "cvm/demo/demo.hpp"
#include "cvm/monitoring/monitor.hpp"

using namespace cvm;
using namespace cvm::monitoring;
using namespace std::chrono_literals;
using lang::Value;

namespace {

std::filesystem::path temp_journal(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("cvm-test-" + tag + "-" + std::to_string(rng()) + ".log");
  std::filesystem::remove(p);
  return p;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct Monitored : ::testing::Test {
  Monitored() {
    demo::register_demo_impls(rt);
    const auto c = rt.create_container();
    client = rt.deploy_component(c, demo::kClient);
    echo = rt.deploy_component(c, demo::kEcho);
    rt.connect(client, "out", echo, "in");
    journal = temp_journal("mon");
  }
  ~Monitored() override {
    rt.shutdown_services();
    std::filesystem::remove(journal);
  }
  std::shared_ptr<Monitor> install() { return Monitor::install(rt, {journal, 20ms}); }
  void call(const std::string& op, int n) {
    for (int i = 0; i < n; ++i) {
      const auto args = op == "echo" ? std::vector<Value>{Value::integer(i)} : std::vector<Value>{};
      ASSERT_TRUE(rt.send_request(client, "out", op, args).ok());
    }
  }
  const MetricSnapshot& find(const MonitorSnapshot& s, MetricHandle h) {
    for (const auto& m : s.metrics)
      if (m.handle == h) return m;
    throw std::runtime_error("metric not in snapshot");
  }

  Runtime rt;
  ComponentId client{};
  ComponentId echo{};
  std::filesystem::path journal;
};

TraceRecord reference_record() {
  TraceRecord r;
  r.date = "2003-09-03 17:48:06,607";
  r.thread = "req-1";
  r.class_name = "Echo";
  r.method = "send_reply";
  r.request_id = 52;
  r.operation = "create";
  r.reply_status = ReplyStatus::successful;
  r.target = "IDL:Echo:1.0";
  return r;
}

}  // namespace

TEST(TraceRecordFormat, MatchesReferenceLine) {
  EXPECT_EQ(format_record(reference_record()),
            "INFO date=2003-09-03 17:48:06,607 thread=req-1 topic=cvm.interceptors.server class=Echo "
            "method=send_reply line=0 request_id=52 operation=create arguments= exceptions= "
            "response_expected=true reply_status=SUCCESSFUL target=IDL:Echo:1.0");
}

TEST(TraceRecordFormat, ParsesReferenceLine) {
  const auto r = parse_record(
      "INFO date=2003-09-03 17:48:06,607 thread=req-1 topic=cvm.interceptors.server class=Echo "
      "method=send_reply line=0 request_id=52 operation=create arguments= exceptions= "
      "response_expected=true reply_status=SUCCESSFUL target=IDL:Echo:1.0");
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, reference_record());
}

TEST(TraceRecordFormat, DiningPhilosophersTarget) {
  auto r = reference_record();
  r.class_name = "DiningPhilosophers/ForkHome";
  r.target = "IDL:DiningPhilosophers/ForkHome:1.0";
  const auto line = format_record(r);
  EXPECT_NE(line.find("target=IDL:DiningPhilosophers/ForkHome:1.0"), std::string::npos);
  EXPECT_EQ(parse_record(line), r);
}

TEST(TraceRecordFormat, RoundTripAwkwardValues) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab =%\n\r\"() xyz%3D";
  for (int i = 0; i < 500; ++i) {
    auto r = reference_record();
    auto rnd = [&] {
      std::string s;
      for (auto n = rng() % 12; n > 0; --n) s += alphabet[rng() % alphabet.size()];
      return s;
    };
    r.arguments = rnd();
    r.exceptions = rnd();
    r.operation = rnd();
    r.thread = rnd();
    if (rng() % 2) r.mono_us = rng();
    r.reply_status = static_cast<ReplyStatus>(rng() % 3);
    const auto line = format_record(r);
    ASSERT_EQ(line.find('\n'), std::string::npos);
    ASSERT_EQ(parse_record(line), r) << line;
  }
}

TEST(TraceRecordFormat, RejectsGarbage) {
  EXPECT_FALSE(parse_record(""));
  EXPECT_FALSE(parse_record("INFO"));
  EXPECT_FALSE(parse_record("DEBUG date=x"));
  EXPECT_FALSE(parse_record("INFO date=2003 thread=x"));
  auto line = format_record(reference_record());
  EXPECT_FALSE(parse_record(line.substr(0, line.size() - 5) + "=oops"));
  EXPECT_FALSE(parse_record(line.replace(line.find("SUCCESSFUL"), 10, "MAYBE")));
}

TEST(TraceRecordFormat, WallClockShape) {
  const auto s = format_wall_clock(std::chrono::system_clock::now());
  ASSERT_EQ(s.size(), 23u);
  EXPECT_EQ(s[4], '-');
  EXPECT_EQ(s[10], ' ');
  EXPECT_EQ(s[19], ',');
}

TEST_F(Monitored, OneRequestTwoLines) {
  install();
  call("echo", 1);
  const auto lines = read_lines(journal);
  ASSERT_EQ(lines.size(), 2u);
  const auto recv = parse_record(lines[0]);
  const auto reply = parse_record(lines[1]);
  ASSERT_TRUE(recv && reply);
  EXPECT_EQ(recv->method, "receive_request");
  EXPECT_EQ(recv->reply_status, ReplyStatus::pending);
  EXPECT_EQ(reply->method, "send_reply");
  EXPECT_EQ(reply->reply_status, ReplyStatus::successful);
  EXPECT_NE(lines[1].find("reply_status=SUCCESSFUL"), std::string::npos);
  EXPECT_EQ(recv->request_id, reply->request_id);
  EXPECT_EQ(reply->class_name, demo::kEcho);
  EXPECT_EQ(reply->target, std::string("IDL:") + demo::kEcho + ":1.0");
  EXPECT_EQ(reply->arguments, "(0)");
  ASSERT_TRUE(recv->mono_us && reply->mono_us);
  EXPECT_LE(*recv->mono_us, *reply->mono_us);
}

TEST_F(Monitored, ExceptionReplyIsTraced) {
  install();
  rt.send_request(client, "out", "echo", {});
  const auto lines = read_lines(journal);
  ASSERT_EQ(lines.size(), 2u);
  const auto reply = parse_record(lines[1]);
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->reply_status, ReplyStatus::exception);
  EXPECT_FALSE(reply->exceptions.empty());
}

TEST_F(Monitored, SecondInstallFails) {
  install();
  try {
    install();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::already_installed);
  }
}

TEST_F(Monitored, UnwritableJournal) {
  try {
    Monitor::install(rt, {"/nonexistent-dir/x/y.log", 20ms});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
  EXPECT_FALSE(Monitor::find(rt));
  EXPECT_EQ(rt.interceptors().size(), 0u);
}

TEST_F(Monitored, EmptyJournalAllZero) {
  auto mon = install();
  mon->register_metric(CountMethod{demo::kEcho, "echo"});
  mon->register_metric(Temporal{demo::kEcho, "echo"});
  mon->scan_now();
  for (const auto& m : mon->snapshot().metrics) EXPECT_EQ(m.count, 0u);
}

TEST_F(Monitored, CountMethodIsExact) {
  auto mon = install();
  const auto h = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  call("echo", 5);
  mon->scan_now();
  EXPECT_EQ(find(mon->snapshot(), h).count, 5u);
}

TEST_F(Monitored, CountComponentIsSumOfMethods) {
  auto mon = install();
  const auto ce = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  const auto cs = mon->register_metric(CountMethod{demo::kEcho, "stats"});
  const auto cc = mon->register_metric(CountComponent{demo::kEcho});
  call("echo", 3);
  call("stats", 2);
  mon->scan_now();
  const auto s = mon->snapshot();
  EXPECT_EQ(find(s, ce).count, 3u);
  EXPECT_EQ(find(s, cs).count, 2u);
  EXPECT_EQ(find(s, cc).count, 5u);
}

TEST_F(Monitored, RegistrationIsNotRetroactive) {
  auto mon = install();
  call("echo", 4);
  const auto h = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  call("echo", 2);
  mon->scan_now();
  EXPECT_EQ(find(mon->snapshot(), h).count, 2u);
}

TEST_F(Monitored, UnregisterFreezes) {
  auto mon = install();
  const auto h = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  call("echo", 3);
  EXPECT_TRUE(mon->unregister_metric(h));
  call("echo", 10);
  mon->scan_now();
  const auto m = find(mon->snapshot(), h);
  EXPECT_EQ(m.count, 3u);
  EXPECT_FALSE(m.active);
  EXPECT_FALSE(mon->unregister_metric(h));
  EXPECT_FALSE(mon->unregister_metric(999999));
}

TEST_F(Monitored, TemporalLowerBound) {
  auto slow = std::make_shared<ComponentImpl>("Sleeper");
  slow->facet("in").operation("nap", [](CallContext&, std::span<const Value>) {
    std::this_thread::sleep_for(5ms);
    return Value::unit();
  });
  rt.register_impl(slow);
  const auto s = rt.deploy_component(rt.create_container(), "Sleeper");
  auto mon = install();
  const auto h = mon->register_metric(Temporal{"Sleeper", "nap"});
  for (int i = 0; i < 10; ++i) ASSERT_TRUE(rt.invoke_direct(s, "nap", {}).ok());
  mon->scan_now();
  const auto m = find(mon->snapshot(), h);
  EXPECT_EQ(m.count, 10u);
  ASSERT_TRUE(m.temporal);
  EXPECT_GE(m.temporal->min_us, 5000u);
  EXPECT_GE(m.temporal->mean_us, 5000.0);
  EXPECT_LE(m.temporal->min_us, m.temporal->mean_us);
  EXPECT_LE(m.temporal->mean_us, static_cast<double>(m.temporal->max_us));
  EXPECT_EQ(m.temporal->total_us, static_cast<std::uint64_t>(m.temporal->mean_us * 10 + 0.5));
}

TEST_F(Monitored, PeriodicScannerCatchesUp) {
  auto mon = install();
  const auto h = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  mon->start();
  mon->start();  // idempotent
  EXPECT_TRUE(mon->running());
  call("echo", 7);
  const auto deadline = std::chrono::steady_clock::now() + 5s;
  while (find(mon->snapshot(), h).count < 7 && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(5ms);
  EXPECT_EQ(find(mon->snapshot(), h).count, 7u);
  mon->stop();
  EXPECT_FALSE(mon->running());
  call("echo", 3);
  std::this_thread::sleep_for(60ms);
  EXPECT_EQ(find(mon->snapshot(), h).count, 7u) << "stopped scanner must not advance";
}

TEST_F(Monitored, PartialTrailingLineIsDeferred) {
  auto mon = install();
  const auto h = mon->register_metric(CountMethod{demo::kEcho, "echo"});
  call("echo", 1);
  // A half-written line from a concurrent writer.
  auto line = read_lines(journal).back();
  line.replace(line.find("request_id=") + 11, 1, "9");
  {
    std::ofstream out(journal, std::ios::app);
    out << line.substr(0, 40);
  }
  mon->scan_now();
  EXPECT_EQ(find(mon->snapshot(), h).count, 1u);
  {
    std::ofstream out(journal, std::ios::app);
    out << line.substr(40) << '\n';
  }
  mon->scan_now();
  EXPECT_EQ(find(mon->snapshot(), h).count, 2u);
  EXPECT_EQ(mon->snapshot().skipped_lines, 0u);
}

TEST_F(Monitored, ConcurrentTrafficIsCountedExactly) {
  auto mon = install();
  const auto h = mon->register_metric(CountComponent{demo::kEcho});
  mon->start();
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&] {
      const auto c = rt.deploy_component(rt.create_container(), demo::kClient);
      (void)c;
    });
  }
  for (auto& t : ts) t.join();
  ts.clear();
  for (int t = 0; t < 4; ++t) ts.emplace_back([&] { call("echo", 250); });
  for (auto& t : ts) t.join();
  mon->stop();
  mon->scan_now();
  EXPECT_EQ(find(mon->snapshot(), h).count, 1000u);
  EXPECT_EQ(read_lines(journal).size(), 2000u);
}

TEST_F(Monitored, DebugMetricDumpsToFile) {
  const auto dump = temp_journal("dump");
  auto mon = install();
  mon->register_metric(DebugMetric{dump});
  call("echo", 2);
  call("stats", 1);
  mon->scan_now();
  const auto lines = read_lines(dump);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_NE(lines[0].find("count=3"), std::string::npos);
  std::filesystem::remove(dump);
}

TEST_F(Monitored, UninstallRemovesInterceptor) {
  install();
  EXPECT_EQ(rt.interceptors().size(), 1u);
  EXPECT_TRUE(Monitor::uninstall(rt));
  EXPECT_EQ(rt.interceptors().size(), 0u);
  call("echo", 3);
  EXPECT_TRUE(read_lines(journal).empty());
  EXPECT_FALSE(Monitor::uninstall(rt));
  install();  // reinstall is allowed after uninstall
}
