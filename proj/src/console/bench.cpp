#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <numeric>

#include "cvm/console/console.hpp"
#include "cvm/error.hpp"
#include "cvm/lang/parser.hpp"
#include "cvm/scripts.hpp"

namespace cvm::console {

using admin::AdminClient;
using Clock = std::chrono::steady_clock;

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  s.samples = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0;
    for (const double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return s;
}

namespace {

// Evaluates one form and fails loudly; bench setup steps must not error.
admin::RemoteOutcome must(AdminClient& c, std::string_view source) {
  auto o = c.eval(lang::parse_one(source));
  if (!o.ok) throw Error(Errc::precondition, fmt::format("bench step {} failed: {}", source, o.text));
  return o;
}

double timed_script_seconds(AdminClient& c, std::string_view source) {
  const auto t0 = Clock::now();
  const auto script = lang::parse(source);
  const auto out = c.submit(script);
  const auto dt = std::chrono::duration<double>(Clock::now() - t0).count();
  if (out.size() != script.forms.size() || !out.back().ok)
    throw Error(Errc::precondition, "bench script failed: " + (out.empty() ? std::string("no forms") : out.back().text));
  return dt;
}

double latency_sample(AdminClient& c, std::size_t requests) {
  return must(c, fmt::format("(measure_latency {})", requests)).result().float_value();
}

}  // namespace

BenchReport run_bench(AdminClient& c, std::size_t repetitions, std::size_t requests) {
  for (const char* name : {"A", "B", "CA"}) {
    const auto probe = c.eval(lang::parse_one(
        fmt::format("({} \"{}\")", name[0] == 'C' ? "lookup_container" : "lookup_component", name)));
    if (!probe.ok) throw Error(Errc::precondition, "bench needs the demo deployment on the node: " + probe.text);
  }
  if (c.eval(lang::parse_one("(lookup_component \"COS\")")).ok)
    throw Error(Errc::precondition, "bench needs A wired straight to B; a COS is already interposed");
  const auto monitor_present = c.eval(lang::parse_one("(invoke \"Monitor\" \"snapshot\" \"\")"));
  if (monitor_present.ok) throw Error(Errc::precondition, "bench needs a node without the monitoring service");

  BenchReport r;
  r.requests_per_sample = requests;
  must(c, "(measure_latency 100)");  // warm-up, creates the bench pair

  // The node interleaves 0/1/4 interceptors in small batches.
  std::vector<double> lat[3];
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto o = must(c, fmt::format("(compare_latency (list 0 1 4) {})", requests));
    const auto reply = o.result();
    if (!reply.is_list() || reply.children().size() != 2 || !reply.children()[0].is_list() ||
        reply.children()[0].children().size() != 3)
      throw Error(Errc::protocol, "unexpected reply " + o.text);
    for (std::size_t k = 0; k < 3; ++k) lat[k].push_back(reply.children()[0].children()[k].float_value());
    r.discarded_batches += static_cast<std::size_t>(reply.children()[1].int_value());
  }
  for (std::size_t k = 0; k < 3; ++k) r.latency_us[k] = summarize(lat[k]);

  std::vector<double> cos;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    cos.push_back(timed_script_seconds(c, scripts::interpose()));
    must(c, "(deinterpose (lookup_component \"COS\"))");
  }
  r.cos_add_s = summarize(cos);

  std::vector<double> mon;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    mon.push_back(timed_script_seconds(c, scripts::monitoring()));
    if (rep + 1 < repetitions) must(c, "(invoke \"Monitor\" \"uninstall\" \"\")");
  }
  r.monitoring_s = summarize(mon);

  // Journal writes make monitored requests slow; cap the sample size.
  const auto sample = std::min<std::size_t>(requests, 10000);
  std::vector<double> with, after;
  for (std::size_t rep = 0; rep < repetitions; ++rep) with.push_back(latency_sample(c, sample));
  must(c, "(invoke \"Monitor\" \"stop\" \"\")");
  must(c, "(invoke \"Monitor\" \"uninstall\" \"\")");
  for (std::size_t rep = 0; rep < repetitions; ++rep) after.push_back(latency_sample(c, sample));
  r.latency_with_monitor_us = summarize(with);
  r.latency_after_removal_us = summarize(after);
  return r;
}

void print_bench(const BenchReport& r, std::ostream& out) {
  auto line = [&](const std::string& label, const Stat& s, const char* unit, int digits) {
    out << fmt::format("{}: mean {:.{}f} {}, stddev {:.{}f} {} (n={})\n", label, s.mean, digits, unit, s.stddev,
                       digits, unit, s.samples);
  };
  line("monitoring integration", r.monitoring_s, "s", 4);
  out << fmt::format("monitoring integration (paper, PIII 664MHz): {:.3f} s\n", kReferenceMonitoringSeconds);
  line("COS add", r.cos_add_s, "s", 4);
  out << fmt::format("COS add (paper): {:.3f} s\n", kReferenceCosAddSeconds);
  const char* names[3] = {"latency, 0 interceptors", "latency, 1 interceptor", "latency, 4 interceptors"};
  for (int k = 0; k < 3; ++k) line(names[k], r.latency_us[k], "us", 3);
  const auto base = r.latency_us[0].mean;
  auto pct = [&](double v) { return base > 0 ? (v - base) / base * 100.0 : 0.0; };
  out << fmt::format("overhead vs 0: 1 interceptor {:+.1f}%, 4 interceptors {:+.1f}%\n", pct(r.latency_us[1].mean),
                     pct(r.latency_us[2].mean));
  out << fmt::format("latency monotone in interceptor count: {}\n", r.latency_monotone() ? "yes" : "no");
  line("latency, monitoring installed", r.latency_with_monitor_us, "us", 3);
  line("latency, monitoring removed", r.latency_after_removal_us, "us", 3);
  out << fmt::format("({} requests per interceptor count and repetition, {} preempted batches re-run)\n",
                     r.requests_per_sample, r.discarded_batches);
}

int run_bench_mode(const ConsoleConfig& config, std::ostream& out, std::ostream& err) {
  try {
    auto client = AdminClient::connect(config.targets.front());
    print_bench(run_bench(client, config.bench_repetitions, config.bench_requests), out);
    return kExitOk;
  } catch (const Error& e) {
    err << "bench: " << e.what() << "\n";
    return e.code() == Errc::connection_refused || e.code() == Errc::connection_lost ? kExitConnection : kExitFormError;
  }
}

}  // namespace cvm::console
