#include "cvm/crypto/cos.hpp"

#include <fmt/format.h>

namespace cvm::crypto {

namespace {

Bytes hex_arg(std::span<const lang::Value> args, std::size_t i, const char* op) {
  if (i >= args.size() || !args[i].is_str()) {
    throw Error(Errc::type, fmt::format("{}: argument {} must be a hex string", op, i + 1));
  }
  auto bytes = from_hex(args[i].as_str());
  if (!bytes) throw Error(Errc::type, fmt::format("{}: argument {} is not valid hex", op, i + 1));
  return *bytes;
}

}  // namespace

MethodBody encrypt_method(std::string_view cipher_name) {
  if (cipher_name == "xor") {
    return [](CallContext& ctx, std::span<const lang::Value> args) {
      if (args.size() != 1) throw Error(Errc::arity, "encrypt expects 1 argument");
      const Bytes plain = hex_arg(args, 0, "encrypt");
      return lang::Value::str(to_hex(xor_rolling(plain, ctx.state<CosState>().key)));
    };
  }
  auto spec = cipher_by_name(cipher_name);
  if (!spec) return {};
  return [spec = std::move(*spec)](CallContext&, std::span<const lang::Value> args) {
    if (args.size() != 1) throw Error(Errc::arity, "encrypt expects 1 argument");
    return lang::Value::str(to_hex(spec.seal(hex_arg(args, 0, "encrypt"))));
  };
}

std::shared_ptr<ComponentImpl> cos_impl() {
  auto impl = std::make_shared<ComponentImpl>(std::string(kCosImplName));
  impl->facet("in").receptacle("out");
  impl->state_factory([](std::span<const lang::Value> init) {
    CosState state;
    if (!init.empty()) state.key = hex_arg(init, 0, "CryptoCOS");
    return std::any(std::move(state));
  });
  impl->operation("encrypt", encrypt_method("xor"), "builtin:xor");
  impl->operation("set_key", [](CallContext& ctx, std::span<const lang::Value> args) {
    if (args.size() != 1) throw Error(Errc::arity, "set_key expects 1 argument");
    ctx.state<CosState>().key = hex_arg(args, 0, "set_key");
    return lang::Value::unit();
  });
  impl->operation("send", [](CallContext& ctx, std::span<const lang::Value> args) {
    if (args.size() != 2 || !args[0].is_int()) throw Error(Errc::arity, "send expects (seq payload-hex)");
    lang::Value sealed = ctx.call_own("encrypt", {args[1]});
    Reply reply = ctx.send("out", "send", {args[0], std::move(sealed)});
    if (!reply.ok()) throw Error(Errc::host, "downstream: " + reply.error);
    return std::move(reply.payload);
  });
  return impl;
}

ComponentId interpose(Runtime& runtime, ContainerId container, const ReceptacleRef& source, const FacetRef& target,
                      std::string_view impl_name, std::span<const lang::Value> init_args) {
  const auto table = runtime.connections();
  const ConnectionTarget* current = table->find(source.component, source.receptacle);
  if (current == nullptr || !(current->target == target)) {
    throw Error(Errc::precondition, fmt::format("{}.{} is not currently connected to {}.{}", raw(source.component),
                                                source.receptacle, raw(target.component), target.facet));
  }
  const auto impl = runtime.find_impl(impl_name);
  if (!impl) throw Error(Errc::unknown_implementation, fmt::format("unknown implementation: {}", impl_name));
  if (impl->facets().size() != 1 || impl->receptacles().size() != 1) {
    throw Error(Errc::precondition, fmt::format("{} must declare exactly one facet and one receptacle", impl_name));
  }
  const std::string in = *impl->facets().begin();
  const std::string out = *impl->receptacles().begin();

  const ComponentId cos = runtime.deploy_component(container, impl_name, init_args);
  const RewireAction actions[] = {
      RewireAction::disconnect(source.component, source.receptacle),
      RewireAction::connect(source.component, source.receptacle, cos, in),
      RewireAction::connect(cos, out, target.component, target.facet),
  };
  try {
    runtime.atomic_rewire(actions);
  } catch (...) {
    runtime.remove_component(cos);
    throw;
  }
  return cos;
}

void deinterpose(Runtime& runtime, ComponentId cos) {
  if (!runtime.has_component(cos)) throw Error(Errc::unknown_component, fmt::format("unknown component: {}", raw(cos)));
  std::vector<Connection> inbound;
  std::vector<Connection> outbound;
  for (const auto& c : runtime.connections()->connections()) {
    if (c.target.component == cos) inbound.push_back(c);
    if (c.source.component == cos) outbound.push_back(c);
  }
  if (inbound.size() != 1 || outbound.size() != 1) {
    throw Error(Errc::precondition,
                fmt::format("component {} has {} inbound and {} outbound connections; expected 1 and 1", raw(cos),
                            inbound.size(), outbound.size()));
  }
  const RewireAction actions[] = {
      RewireAction::disconnect(inbound[0].source.component, inbound[0].source.receptacle),
      RewireAction::disconnect(cos, outbound[0].source.receptacle),
      RewireAction::connect(inbound[0].source.component, inbound[0].source.receptacle,
                            outbound[0].target.component, outbound[0].target.facet),
  };
  runtime.atomic_rewire(actions);
  runtime.remove_component(cos);
}

}  // namespace cvm::crypto
