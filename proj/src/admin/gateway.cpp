#include "cvm/admin/gateway.hpp"

#include <httplib.h>

#include <json.hpp>
#include <mutex>
#include <thread>

#include "cvm/lang/parser.hpp"
#include "cvm/lang/printer.hpp"
#include "cvm/monitoring/monitor.hpp"

namespace cvm::admin {

using nlohmann::json;

std::string topology_json(const Runtime& rt) {
  const auto topo = rt.topology();
  json containers = json::array();
  for (const auto& c : topo.containers) {
    json ids = json::array();
    for (auto id : c.components) ids.push_back(raw(id));
    containers.push_back({{"id", raw(c.id)}, {"name", c.name}, {"components", ids}});
  }
  json components = json::array();
  for (const auto& c : topo.components) {
    components.push_back({{"id", raw(c.id)},
                          {"name", c.name},
                          {"impl", c.impl},
                          {"container", raw(c.container)},
                          {"facets", c.facets},
                          {"receptacles", c.receptacles}});
  }
  json connections = json::array();
  for (const auto& c : topo.connections) {
    connections.push_back({{"source", {{"component", raw(c.source.component)}, {"port", c.source.receptacle}}},
                           {"target", {{"component", raw(c.target.component)}, {"port", c.target.facet}}}});
  }
  return json{{"version", topo.version}, {"containers", containers}, {"components", components},
              {"connections", connections}}
      .dump();
}

std::string metrics_json(const Runtime& rt) {
  const auto mon = monitoring::Monitor::find(rt);
  if (!mon) return json{{"installed", false}, {"running", false}, {"generation", 0}, {"metrics", json::array()}}.dump();
  const auto snap = mon->snapshot();
  json metrics = json::array();
  for (const auto& m : snap.metrics) {
    json t = nullptr;
    if (m.temporal) {
      t = {{"min_us", m.temporal->min_us},
           {"max_us", m.temporal->max_us},
           {"mean_us", m.temporal->mean_us},
           {"total_us", m.temporal->total_us}};
    }
    metrics.push_back({{"handle", m.handle},
                       {"kind", m.kind},
                       {"impl", m.impl},
                       {"operation", m.operation},
                       {"active", m.active},
                       {"count", m.count},
                       {"temporal", t}});
  }
  return json{{"installed", true},          {"running", snap.running},
              {"generation", snap.generation}, {"scanned_bytes", snap.scanned_bytes},
              {"skipped_lines", snap.skipped_lines}, {"metrics", metrics}}
      .dump();
}

std::string symbols_json(const core::Cvm& cvm) { return json(*cvm.symbols()).dump(); }

ScriptResponse run_script_json(core::Cvm& cvm, const std::string& source, bool keep_going) {
  lang::Script script;
  try {
    script = lang::parse(source);
  } catch (const lang::ParseError& e) {
    return {400, json{{"error", e.detail()}, {"line", e.line()}, {"column", e.column()}}.dump()};
  }
  json results = json::array();
  bool complete = true;
  for (std::size_t i = 0; i < script.forms.size(); ++i) {
    const auto o = cvm.execute(script.forms[i], i);
    json entry{{"index", i}, {"form", lang::print(script.forms[i])}};
    if (o.ok) {
      entry["ok"] = o.value.is_unit() ? std::string("unit") : lang::print_value(o.value);
    } else {
      entry["error"] = o.error;
      entry["code"] = std::string(to_string(o.code));
    }
    results.push_back(std::move(entry));
    if (!o.ok && !keep_going) {
      complete = i + 1 == script.forms.size();
      break;
    }
  }
  return {200, json{{"results", results}, {"complete", complete}}.dump()};
}

struct Gateway::Impl {
  Impl(core::Cvm& cvm, GatewayConfig config) : cvm(cvm), config(std::move(config)) {}

  core::Cvm& cvm;
  GatewayConfig config;
  httplib::Server server;
  std::thread thread;
  std::mutex submit_mutex;  // one HTTP script at a time
  std::atomic<bool> stopping{false};
};

Gateway::Gateway(core::Cvm& cvm, GatewayConfig config) : impl_(std::make_unique<Impl>(cvm, std::move(config))) {
  auto& im = *impl_;
  auto& srv = im.server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  srv.Get("/api/topology", [&im](const httplib::Request&, httplib::Response& res) {
    res.set_content(topology_json(im.cvm.runtime()), "application/json");
  });
  srv.Get("/api/metrics", [&im](const httplib::Request&, httplib::Response& res) {
    res.set_content(metrics_json(im.cvm.runtime()), "application/json");
  });
  srv.Get("/api/symbols", [&im](const httplib::Request&, httplib::Response& res) {
    res.set_content(symbols_json(im.cvm), "application/json");
  });
  srv.Options("/api/script", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  srv.Post("/api/script", [&im](const httplib::Request& req, httplib::Response& res) {
    const auto flag = req.get_param_value("keep_going");
    const bool keep_going = flag == "1" || flag == "true";
    std::lock_guard lock(im.submit_mutex);
    const auto r = run_script_json(im.cvm, req.body, keep_going);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });

  // Server-sent events: one event per observed change.
  srv.Get("/api/events", [&im](const httplib::Request&, httplib::Response& res) {
    res.set_header("Cache-Control", "no-cache");
    struct Seen {
      std::uint64_t topology = UINT64_MAX;
      std::uint64_t metrics = UINT64_MAX;
    };
    auto seen = std::make_shared<Seen>();
    res.set_chunked_content_provider("text/event-stream", [&im, seen](std::size_t, httplib::DataSink& sink) {
      if (im.stopping) return false;
      auto& rt = im.cvm.runtime();
      std::string out;
      if (const auto v = rt.topology_version(); v != seen->topology) {
        seen->topology = v;
        out += "event: topology-changed\ndata: " + json{{"version", v}}.dump() + "\n\n";
      }
      const auto mon = monitoring::Monitor::find(rt);
      const std::uint64_t g = mon ? mon->generation() : 0;
      if (g != seen->metrics) {
        seen->metrics = g;
        out += "event: metrics-updated\ndata: " + json{{"generation", g}}.dump() + "\n\n";
      }
      if (out.empty()) out = ": keep-alive\n\n";
      if (!sink.write(out.data(), out.size())) return false;
      std::this_thread::sleep_for(im.config.event_poll);
      return !im.stopping;
    });
  });
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  auto& im = *impl_;
  if (im.thread.joinable()) return;
  im.stopping = false;
  int port = im.config.port;
  if (port == 0) port = im.server.bind_to_any_port(im.config.address);
  else if (!im.server.bind_to_port(im.config.address, port)) port = -1;
  if (port <= 0) throw Error(Errc::io, "cannot listen on " + im.config.address + ":" + std::to_string(im.config.port));
  port_ = static_cast<std::uint16_t>(port);
  im.thread = std::thread([&im] { im.server.listen_after_bind(); });
  im.server.wait_until_ready();
}

void Gateway::stop() {
  auto& im = *impl_;
  if (!im.thread.joinable()) return;
  im.stopping = true;
  im.server.stop();
  im.thread.join();
}

}  // namespace cvm::admin
