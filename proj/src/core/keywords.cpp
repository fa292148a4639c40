#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <limits>

#include "cvm/core/cvm.hpp"
#include "cvm/crypto/cos.hpp"
#include "cvm/demo/demo.hpp"
#include "cvm/lang/printer.hpp"

namespace cvm::core {

using lang::AstNode;
using lang::Environment;
using lang::HandleKind;
using lang::Value;
using Args = std::span<const Value>;

namespace {

void arity(std::string_view name, Args args, std::size_t min, std::size_t max) {
  if (args.size() >= min && args.size() <= max) return;
  if (min == max) throw Error(Errc::arity, fmt::format("{} expects {} argument(s), got {}", name, min, args.size()));
  if (max == SIZE_MAX)
    throw Error(Errc::arity, fmt::format("{} expects at least {} argument(s), got {}", name, min, args.size()));
  throw Error(Errc::arity, fmt::format("{} expects {} to {} arguments, got {}", name, min, max, args.size()));
}

const std::string& str_arg(std::string_view name, Args args, std::size_t i) {
  if (!args[i].is_str())
    throw Error(Errc::type, fmt::format("{}: argument {} must be a Str, got {}", name, i + 1, lang::print_value(args[i])));
  return args[i].as_str();
}

std::int64_t int_arg(std::string_view name, Args args, std::size_t i) {
  if (!args[i].is_int())
    throw Error(Errc::type, fmt::format("{}: argument {} must be an Int, got {}", name, i + 1, lang::print_value(args[i])));
  return args[i].as_int();
}

std::vector<std::string> str_list(std::string_view name, const Value& v) {
  if (!v.is_list()) throw Error(Errc::type, fmt::format("{}: expected a list of Str", name));
  std::vector<std::string> out;
  for (const auto& item : v.as_list()) {
    if (!item.is_str()) throw Error(Errc::type, fmt::format("{}: expected a list of Str", name));
    out.push_back(item.as_str());
  }
  return out;
}

Value component_handle(ComponentId id) { return Value::handle(raw(id), HandleKind::component); }
Value container_handle(ContainerId id) { return Value::handle(raw(id), HandleKind::container); }

const lang::Proc& proc_named(const Environment& env, const std::string& name) {
  const auto* b = env.find(name);
  const auto* proc = b ? std::get_if<lang::Proc>(b) : nullptr;
  if (proc == nullptr) throw Error(Errc::not_found, "no procedure named '" + name + "'");
  return *proc;
}

// A method body running a script procedure. Each call gets a fresh base
// environment: component bodies run in request contexts and must not touch
// the node's environment.
MethodBody proc_body(lang::Proc proc, std::string name) {
  return [proc = std::move(proc), name = std::move(name)](CallContext&, Args args) {
    auto env = lang::standard_environment();
    return lang::apply_proc(proc, args, env, name);
  };
}

std::optional<InterceptionPoint> point_from_name(std::string_view s) {
  for (auto p : {InterceptionPoint::client_send_request, InterceptionPoint::server_receive_request,
                 InterceptionPoint::server_send_reply, InterceptionPoint::client_receive_reply}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

Value reply_payload(const Reply& r) {
  if (!r.ok()) throw Error(Errc::host, r.error);
  return r.payload;
}

Value metric_value(const monitoring::MetricSnapshot& m) {
  Value::List row{Value::handle(m.handle, HandleKind::metric), Value::str(m.kind), Value::str(m.impl),
                  Value::str(m.operation), Value::integer(static_cast<std::int64_t>(m.count))};
  if (m.temporal) {
    row.push_back(Value::integer(static_cast<std::int64_t>(m.temporal->min_us)));
    row.push_back(Value::floating(m.temporal->mean_us));
    row.push_back(Value::integer(static_cast<std::int64_t>(m.temporal->max_us)));
    row.push_back(Value::integer(static_cast<std::int64_t>(m.temporal->total_us)));
  }
  return Value::list(std::move(row));
}

}  // namespace

const std::vector<std::string>& keyword_names() {
  static const std::vector<std::string> names = {
      "get_runtime", "getorb", "clssLoaderCCM", "add_url_classloader", "add_plugin_path", "plugin_paths",
      "load_impl", "jrun", "declare_impl", "add_container", "lookup_container", "lookup_component",
      "add_component", "remove_component", "connect", "disconnect", "rewire", "interpose", "deinterpose",
      "invoke", "runCCM", "runCCM_arg", "replace_method", "method_versions", "register_interceptor_service",
      "unregister_interceptor_service", "deploy_demo", "measure_latency", "compare_latency"};
  return names;
}

void Cvm::install_keywords() {
  install_registry_keywords();
  install_invoke_keywords();
  install_service_keywords();
}

void Cvm::install_registry_keywords() {
  auto get_runtime = [](Environment&, Args args) {
    arity("get_runtime", args, 0, 0);
    return Value::handle(0, HandleKind::runtime);
  };
  env_.define_native("get_runtime", get_runtime);
  env_.define_native("getorb", get_runtime);

  // (clssLoaderCCM f args...) is (f args...).
  env_.define_special("clssLoaderCCM", [](Environment& env, std::span<const AstNode> ops) {
    if (ops.empty() || !ops[0].is_symbol())
      throw Error(Errc::bad_form, "expected (clssLoaderCCM name args...)");
    return lang::eval(AstNode::list({ops.begin(), ops.end()}), env);
  });

  auto add_path = [this](Environment&, Args args) {
    arity("add_url_classloader", args, 1, 1);
    plugin_path_.add(str_arg("add_url_classloader", args, 0));
    return Value::unit();
  };
  env_.define_native("add_url_classloader", add_path);
  env_.define_native("add_plugin_path", add_path);
  env_.define_native("plugin_paths", [this](Environment&, Args args) {
    arity("plugin_paths", args, 0, 0);
    Value::List out;
    for (const auto& p : plugin_path_.entries()) out.push_back(Value::str(p));
    return Value::list(std::move(out));
  });

  auto load = [this](Environment&, Args args) {
    arity("load_impl", args, 1, 1);
    const auto& name = str_arg("load_impl", args, 0);
    if (rt_.find_impl(name)) return Value::unit();
    const auto* factory = catalog_.find(name);
    if (factory == nullptr) {
      std::string searched = "built-in catalog";
      for (const auto& p : plugin_path_.entries()) searched += ", " + p;
      throw Error(Errc::not_found, fmt::format("implementation '{}' not found (searched: {})", name, searched));
    }
    rt_.register_impl((*factory)());
    return Value::unit();
  };
  env_.define_native("load_impl", load);
  env_.define_native("jrun", load);

  // (declare_impl name (facets...) (receptacles...) op proc-name ...)
  env_.define_native("declare_impl", [this](Environment& env, Args args) {
    arity("declare_impl", args, 3, SIZE_MAX);
    if ((args.size() - 3) % 2 != 0) throw Error(Errc::arity, "declare_impl expects operation/procedure pairs");
    const auto& name = str_arg("declare_impl", args, 0);
    auto facets = str_list("declare_impl", args[1]);
    auto receptacles = str_list("declare_impl", args[2]);
    std::vector<std::pair<std::string, lang::Proc>> ops;
    for (std::size_t i = 3; i < args.size(); i += 2) {
      const auto& op = str_arg("declare_impl", args, i);
      ops.emplace_back(op, proc_named(env, str_arg("declare_impl", args, i + 1)));
    }
    catalog_.add(name, [name, facets, receptacles, ops] {
      auto impl = std::make_shared<ComponentImpl>(name);
      for (const auto& f : facets) impl->facet(f);
      for (const auto& r : receptacles) impl->receptacle(r);
      for (const auto& [op, proc] : ops) impl->operation(op, proc_body(proc, op), "script");
      return impl;
    });
    return Value::unit();
  });

  env_.define_native("add_container", [this](Environment&, Args args) {
    arity("add_container", args, 0, 1);
    return container_handle(rt_.create_container(args.empty() ? "" : str_arg("add_container", args, 0)));
  });
  env_.define_native("lookup_container", [this](Environment&, Args args) {
    arity("lookup_container", args, 1, 1);
    return container_handle(rt_.find_container(str_arg("lookup_container", args, 0)));
  });
  env_.define_native("lookup_component", [this](Environment&, Args args) {
    arity("lookup_component", args, 1, 1);
    return component_handle(rt_.find_component(str_arg("lookup_component", args, 0)));
  });

  // (add_component container impl [name [init-args...]])
  env_.define_native("add_component", [this](Environment&, Args args) {
    arity("add_component", args, 2, SIZE_MAX);
    const auto container = container_of(args[0]);
    const auto& impl = str_arg("add_component", args, 1);
    const std::string name = args.size() > 2 ? str_arg("add_component", args, 2) : "";
    const auto init = args.size() > 3 ? args.subspan(3) : Args{};
    return component_handle(rt_.deploy_component(container, impl, init, name));
  });
  env_.define_native("remove_component", [this](Environment&, Args args) {
    arity("remove_component", args, 1, 1);
    rt_.remove_component(component_of(args[0]));
    return Value::unit();
  });

  env_.define_native("connect", [this](Environment&, Args args) {
    arity("connect", args, 4, 4);
    rt_.connect(component_of(args[0]), str_arg("connect", args, 1), component_of(args[2]), str_arg("connect", args, 3));
    return Value::unit();
  });
  env_.define_native("disconnect", [this](Environment&, Args args) {
    arity("disconnect", args, 2, 2);
    rt_.disconnect(component_of(args[0]), str_arg("disconnect", args, 1));
    return Value::unit();
  });

  // (rewire action...) where an action is ("disconnect" src rcpt) or
  // ("connect" src rcpt dst facet); a single list of actions also works.
  env_.define_native("rewire", [this](Environment&, Args args) {
    Args actions = args;
    if (args.size() == 1 && args[0].is_list() && !args[0].as_list().empty() && args[0].as_list()[0].is_list())
      actions = args[0].as_list();
    std::vector<RewireAction> plan;
    for (const auto& a : actions) {
      if (!a.is_list() || a.as_list().empty() || !a.as_list()[0].is_str())
        throw Error(Errc::type, "rewire: each action must be a list starting with \"connect\" or \"disconnect\"");
      const Args parts = a.as_list();
      const auto& verb = parts[0].as_str();
      if (verb == "disconnect") {
        arity("rewire disconnect", parts.subspan(1), 2, 2);
        plan.push_back(RewireAction::disconnect(component_of(parts[1]), str_arg("rewire", parts, 2)));
      } else if (verb == "connect") {
        arity("rewire connect", parts.subspan(1), 4, 4);
        plan.push_back(RewireAction::connect(component_of(parts[1]), str_arg("rewire", parts, 2),
                                             component_of(parts[3]), str_arg("rewire", parts, 4)));
      } else {
        throw Error(Errc::type, "rewire: unknown action \"" + verb + "\"");
      }
    }
    rt_.atomic_rewire(plan);
    return Value::unit();
  });

  // (interpose container src rcpt dst facet [impl [init-args...]])
  env_.define_native("interpose", [this](Environment&, Args args) {
    arity("interpose", args, 5, SIZE_MAX);
    const std::string impl = args.size() > 5 ? str_arg("interpose", args, 5) : std::string(crypto::kCosImplName);
    if (!rt_.find_impl(impl)) {
      if (const auto* f = catalog_.find(impl)) rt_.register_impl((*f)());
    }
    const auto init = args.size() > 6 ? args.subspan(6) : Args{};
    return component_handle(crypto::interpose(rt_, container_of(args[0]),
                                              {component_of(args[1]), str_arg("interpose", args, 2)},
                                              {component_of(args[3]), str_arg("interpose", args, 4)}, impl, init));
  });
  env_.define_native("deinterpose", [this](Environment&, Args args) {
    arity("deinterpose", args, 1, 1);
    crypto::deinterpose(rt_, component_of(args[0]));
    return Value::unit();
  });

  env_.define_native("deploy_demo", [this](Environment&, Args args) {
    arity("deploy_demo", args, 2, 2);
    const auto interval = int_arg("deploy_demo", args, 0);
    const auto count = int_arg("deploy_demo", args, 1);
    if (interval < 0 || count < 0) throw Error(Errc::type, "deploy_demo expects non-negative interval and count");
    const auto topo = demo::deploy_demo(rt_, std::chrono::milliseconds(interval), static_cast<std::uint64_t>(count));
    return Value::list({container_handle(topo.ca), container_handle(topo.cb), component_handle(topo.a),
                        component_handle(topo.b)});
  });
}

MethodBody Cvm::method_by_name(const std::string& name) {
  if (auto body = crypto::encrypt_method(name)) return body;
  return proc_body(proc_named(env_, name), name);
}

void Cvm::install_invoke_keywords() {
  // (invoke target op signature args...); the signature is not checked.
  auto invoke_fn = [this](Environment&, Args args) {
    arity("invoke", args, 3, SIZE_MAX);
    const auto& op = str_arg("invoke", args, 1);
    str_arg("invoke", args, 2);
    return invoke(args[0], op, args.subspan(3));
  };
  env_.define_native("invoke", invoke_fn);
  env_.define_native("runCCM", invoke_fn);
  env_.define_native("runCCM_arg", invoke_fn);

  env_.define_native("replace_method", [this](Environment&, Args args) {
    arity("replace_method", args, 3, 3);
    const auto& impl = str_arg("replace_method", args, 0);
    const auto& op = str_arg("replace_method", args, 1);
    const auto& with = str_arg("replace_method", args, 2);
    return Value::integer(rt_.replace_method(impl, op, method_by_name(with), with));
  });
  env_.define_native("method_versions", [this](Environment&, Args args) {
    arity("method_versions", args, 2, 2);
    Value::List out;
    for (auto v : rt_.method_versions(str_arg("method_versions", args, 0), str_arg("method_versions", args, 1)))
      out.push_back(Value::integer(v));
    return Value::list(std::move(out));
  });
}

Value Cvm::invoke(const Value& target, const std::string& op, Args args) {
  if (target.is_handle()) {
    const auto& h = target.as_handle();
    switch (h.kind) {
      case HandleKind::component:
        return reply_payload(rt_.invoke_direct(component_of(target), op, {args.begin(), args.end()}));
      case HandleKind::service:
        if (h.id == monitor_handle_ && monitor_.lock()) return invoke_monitor(op, args);
        throw Error(Errc::unknown_handle, "no service behind " + lang::print_value(target));
      default:
        throw Error(Errc::unknown_handle, "cannot invoke on " + lang::print_value(target));
    }
  }
  if (!target.is_str()) throw Error(Errc::type, "invoke target must be a class name or a handle");
  const auto& cls = target.as_str();

  if (cls == monitoring::kMonitorServiceName) return invoke_monitor(op, args);

  auto make_spec = [&](monitoring::MetricSpec spec) {
    const auto id = rt_.next_id();
    metric_specs_.emplace(id, std::move(spec));
    return Value::handle(id, HandleKind::metric);
  };
  if (cls == "DebugMetric") {
    if (op != "DebugMetric" && op != "new") throw Error(Errc::unknown_operation, "DebugMetric has no operation " + op);
    arity("DebugMetric", args, 1, 1);
    return make_spec(monitoring::DebugMetric{str_arg("DebugMetric", args, 0)});
  }
  if (cls == "CountMethod" || cls == "CountComponent" || cls == "Temporal") {
    if (op != "new" && op != cls) throw Error(Errc::unknown_operation, cls + " has no operation " + op);
    if (cls == "CountComponent") {
      arity(cls, args, 1, 1);
      return make_spec(monitoring::CountComponent{str_arg(cls, args, 0)});
    }
    arity(cls, args, 2, 2);
    if (cls == "CountMethod") return make_spec(monitoring::CountMethod{str_arg(cls, args, 0), str_arg(cls, args, 1)});
    return make_spec(monitoring::Temporal{str_arg(cls, args, 0), str_arg(cls, args, 1)});
  }

  // An impl name addresses its single deployed instance.
  if (rt_.find_impl(cls)) {
    std::vector<ComponentId> instances;
    for (const auto& c : rt_.components())
      if (c.impl == cls) instances.push_back(c.id);
    if (instances.size() != 1)
      throw Error(Errc::precondition, fmt::format("{} has {} instances; invoke needs exactly one", cls, instances.size()));
    return reply_payload(rt_.invoke_direct(instances[0], op, {args.begin(), args.end()}));
  }
  throw Error(Errc::not_found, "no class or implementation named '" + cls + "'");
}

std::shared_ptr<monitoring::Monitor> Cvm::monitor_or_throw() const {
  auto mon = monitor_.lock();
  if (!mon || monitoring::Monitor::find(rt_) != mon) throw Error(Errc::not_installed, "monitoring is not installed");
  return mon;
}

Value Cvm::invoke_monitor(const std::string& op, Args args) {
  // Operations accept (and ignore) a leading monitor handle.
  if (!args.empty() && args[0].is_handle() && args[0].as_handle().kind == HandleKind::service) args = args.subspan(1);

  if (op == "getInstance") {
    auto mon = monitoring::Monitor::find(rt_);
    if (!mon) mon = monitoring::Monitor::install(rt_, {config_.journal, config_.scan_interval});
    if (mon != monitor_.lock()) {
      monitor_ = mon;
      monitor_handle_ = rt_.next_id();
    }
    return Value::handle(monitor_handle_, HandleKind::service);
  }
  if (op == "registerMetric") {
    arity("registerMetric", args, 1, 1);
    if (!args[0].is_handle() || args[0].as_handle().kind != HandleKind::metric)
      throw Error(Errc::type, "registerMetric expects a metric handle");
    const auto it = metric_specs_.find(args[0].as_handle().id);
    if (it == metric_specs_.end()) throw Error(Errc::unknown_handle, "not a metric definition: " + lang::print_value(args[0]));
    return Value::handle(monitor_or_throw()->register_metric(it->second), HandleKind::metric);
  }
  if (op == "unregisterMetric") {
    arity("unregisterMetric", args, 1, 1);
    if (!args[0].is_handle() || args[0].as_handle().kind != HandleKind::metric)
      throw Error(Errc::type, "unregisterMetric expects a metric handle");
    auto mon = monitor_or_throw();
    if (!mon->has_metric(args[0].as_handle().id))
      throw Error(Errc::unknown_handle, "no registered metric " + lang::print_value(args[0]));
    return Value::boolean(mon->unregister_metric(args[0].as_handle().id));
  }
  if (op == "start" || op == "stop" || op == "scan") {
    arity(op, args, 0, 0);
    auto mon = monitor_or_throw();
    if (op == "start") mon->start();
    else if (op == "stop") mon->stop();
    else mon->scan_now();
    return Value::unit();
  }
  if (op == "snapshot") {
    arity(op, args, 0, 0);
    Value::List rows;
    for (const auto& m : monitor_or_throw()->snapshot().metrics) rows.push_back(metric_value(m));
    return Value::list(std::move(rows));
  }
  if (op == "uninstall") {
    arity(op, args, 0, 0);
    monitor_.reset();
    return Value::boolean(monitoring::Monitor::uninstall(rt_));
  }
  throw Error(Errc::unknown_operation, "Monitor has no operation " + op);
}

void Cvm::ensure_bench_pair() {
  if (!bench_pair_ || !rt_.has_component(bench_pair_->first) || !rt_.has_component(bench_pair_->second)) {
    if (!rt_.find_impl(demo::kEcho)) rt_.register_impl(demo::echo_impl());
    if (!rt_.find_impl(demo::kClient)) rt_.register_impl(demo::client_impl());
    const auto c = rt_.create_container("bench");
    const auto client = rt_.deploy_component(c, demo::kClient, {}, "bench-client");
    const auto echo = rt_.deploy_component(c, demo::kEcho, {}, "bench-echo");
    rt_.connect(client, "out", echo, "in");
    bench_pair_.emplace(client, echo);
  }
}

double Cvm::measure_latency(std::size_t count) {
  ensure_bench_pair();
  const std::vector<Value> args{Value::str("ping")};
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) {
    const auto r = rt_.send_request(bench_pair_->first, "out", "echo", args);
    if (!r.ok()) throw Error(Errc::host, "bench request failed: " + r.error);
  }
  const std::chrono::duration<double, std::micro> elapsed = std::chrono::steady_clock::now() - t0;
  return count == 0 ? 0.0 : elapsed.count() / static_cast<double>(count);
}

LatencyComparison Cvm::compare_latency(const std::vector<std::size_t>& counts, std::size_t requests,
                                       std::size_t batch) {
  ensure_bench_pair();
  batch = std::max<std::size_t>(1, std::min(batch, requests));
  const std::vector<Value> args{Value::str("ping")};

  // Batches slower than twice the best per-request time of their own count
  // were preempted; they are dropped and replaced by further rounds.
  struct Track {
    std::vector<std::pair<double, std::size_t>> batches;  // (µs, requests)
    double best = std::numeric_limits<double>::infinity();
    double kept_us = 0;
    std::size_t kept = 0;
    void add(double us, std::size_t n) {
      batches.emplace_back(us, n);
      const double per = us / static_cast<double>(n);
      if (per < best) {
        best = per;
        kept_us = 0;
        kept = 0;
        for (const auto& [u, m] : batches) {
          if (u / static_cast<double>(m) <= 2 * best) {
            kept_us += u;
            kept += m;
          }
        }
      } else if (per <= 2 * best) {
        kept_us += us;
        kept += n;
      }
    }
  };
  std::vector<Track> tracks(counts.size());
  const std::size_t max_batches = 20 * ((requests + batch - 1) / batch);
  std::vector<std::uint64_t> regs;
  auto run_batch = [&](std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < counts[k]; ++i)
      regs.push_back(rt_.interceptors().register_interceptor(PointSet::all(), [](InterceptionPoint, RequestInfo&) {}));
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rt_.send_request(bench_pair_->first, "out", "echo", args);
      if (!r.ok()) throw Error(Errc::host, "bench request failed: " + r.error);
    }
    const auto us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    for (const auto h : regs) rt_.interceptors().unregister_interceptor(h);
    regs.clear();
    return us;
  };

  for (std::size_t k = 0; k < counts.size(); ++k) run_batch(k, batch);  // warm-up, not counted
  for (std::size_t round = 0;; ++round) {
    bool more = false;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const auto k = (round + j) % counts.size();  // rotate who goes first
      auto& t = tracks[k];
      if (t.kept >= requests || t.batches.size() >= max_batches) continue;
      const auto n = std::min(batch, requests - t.kept);
      t.add(run_batch(k, n), n);
      more = true;
    }
    if (!more) break;
  }

  LatencyComparison out;
  for (const auto& t : tracks) {
    out.mean_us.push_back(t.kept == 0 ? 0.0 : t.kept_us / static_cast<double>(t.kept));
    out.requests.push_back(t.kept);
    std::size_t dropped = 0;
    for (const auto& [u, m] : t.batches) dropped += u / static_cast<double>(m) > 2 * t.best ? 1 : 0;
    out.discarded_batches += dropped;
  }
  return out;
}

void Cvm::install_service_keywords() {
  // (register_interceptor_service "noop" [point-name...])
  env_.define_native("register_interceptor_service", [this](Environment&, Args args) {
    arity("register_interceptor_service", args, 1, 5);
    const auto& kind = str_arg("register_interceptor_service", args, 0);
    if (kind != "noop") throw Error(Errc::not_found, "no interceptor service named '" + kind + "'");
    PointSet points = PointSet::all();
    if (args.size() > 1) {
      points = {};
      for (std::size_t i = 1; i < args.size(); ++i) {
        const auto p = point_from_name(str_arg("register_interceptor_service", args, i));
        if (!p) throw Error(Errc::type, "unknown interception point " + args[i].as_str());
        points = points.with(*p);
      }
    }
    const auto reg = rt_.interceptors().register_interceptor(points, [](InterceptionPoint, RequestInfo&) {});
    const auto id = rt_.next_id();
    interceptor_services_.emplace(id, reg);
    return Value::handle(id, HandleKind::interceptor);
  });
  env_.define_native("unregister_interceptor_service", [this](Environment&, Args args) {
    arity("unregister_interceptor_service", args, 1, 1);
    if (!args[0].is_handle() || args[0].as_handle().kind != HandleKind::interceptor)
      throw Error(Errc::type, "expected an interceptor handle");
    const auto it = interceptor_services_.find(args[0].as_handle().id);
    if (it == interceptor_services_.end()) return Value::boolean(false);
    const bool removed = rt_.interceptors().unregister_interceptor(it->second);
    interceptor_services_.erase(it);
    return Value::boolean(removed);
  });

  env_.define_native("measure_latency", [this](Environment&, Args args) {
    arity("measure_latency", args, 1, 1);
    const auto n = int_arg("measure_latency", args, 0);
    if (n <= 0) throw Error(Errc::type, "measure_latency expects a positive count");
    return Value::floating(measure_latency(static_cast<std::size_t>(n)));
  });

  // (compare_latency (0 1 4) requests [batch]) -> ((mean-µs per count...) discarded-batches)
  env_.define_native("compare_latency", [this](Environment&, Args args) {
    arity("compare_latency", args, 2, 3);
    if (!args[0].is_list()) throw Error(Errc::type, "compare_latency expects a list of interceptor counts");
    std::vector<std::size_t> counts;
    for (const auto& v : args[0].as_list()) {
      if (!v.is_int() || v.as_int() < 0 || v.as_int() > 64)
        throw Error(Errc::type, "interceptor counts must be integers in [0, 64]");
      counts.push_back(static_cast<std::size_t>(v.as_int()));
    }
    const auto n = int_arg("compare_latency", args, 1);
    const auto batch = args.size() > 2 ? int_arg("compare_latency", args, 2) : 100;
    if (n <= 0 || batch <= 0) throw Error(Errc::type, "compare_latency expects positive request and batch counts");
    const auto r = compare_latency(counts, static_cast<std::size_t>(n), static_cast<std::size_t>(batch));
    std::vector<Value> means;
    for (const double us : r.mean_us) means.push_back(Value::floating(us));
    return Value::list({Value::list(std::move(means)), Value::integer(static_cast<std::int64_t>(r.discarded_batches))});
  });
}

}  // namespace cvm::core
