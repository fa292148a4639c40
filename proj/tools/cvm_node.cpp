// A CVM node: runtime + control loop, TCP admin port and HTTP gateway.
#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <limits>

#include "cvm/admin/gateway.hpp"
#include "cvm/admin/server.hpp"
#include "cvm/demo/demo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CVM node: serves the admin protocol and the HTTP gateway"};
  std::string address = "127.0.0.1";
  std::uint16_t port = cvm::admin::kDefaultAdminPort;
  std::uint16_t gateway_port = cvm::admin::kDefaultGatewayPort;
  bool no_gateway = false;
  std::string bootstrap;
  std::string journal;
  bool demo = false;
  int demo_interval_ms = 1;
  std::uint64_t demo_count = 0;
  app.add_option("--address", address, "Bind address for both listeners")->capture_default_str();
  app.add_option("--port", port, "Admin TCP port (0 picks a free one)")->capture_default_str();
  app.add_option("--gateway-port", gateway_port, "HTTP gateway port (0 picks a free one)")->capture_default_str();
  app.add_flag("--no-gateway", no_gateway, "Do not start the HTTP gateway");
  app.add_option("--bootstrap", bootstrap, "Script evaluated before serving (default: $CVM_BOOTSTRAP)");
  app.add_option("--journal", journal, "Monitoring journal path");
  app.add_flag("--demo", demo, "Deploy the A -> B demo before serving");
  app.add_option("--demo-interval", demo_interval_ms, "Demo emission interval in ms")->capture_default_str();
  app.add_option("--demo-count", demo_count, "Messages A emits (0 = until shutdown)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  try {
    cvm::Runtime rt;
    cvm::core::NodeConfig config;
    config.journal = journal;
    cvm::core::Cvm node(rt, config);

    std::optional<std::filesystem::path> boot;
    if (!bootstrap.empty()) boot = bootstrap;
    else boot = cvm::admin::bootstrap_path_from_env();
    if (boot) cvm::admin::run_bootstrap(node, *boot);

    if (demo) {
      const auto count = demo_count == 0 ? std::numeric_limits<std::uint64_t>::max() : demo_count;
      cvm::demo::deploy_demo(rt, std::chrono::milliseconds(demo_interval_ms), count);
    }

    cvm::admin::AdminServer server(node, {address, port});
    server.start();
    std::optional<cvm::admin::Gateway> gateway;
    if (!no_gateway) {
      gateway.emplace(node, cvm::admin::GatewayConfig{address, gateway_port});
      gateway->start();
    }
    std::cout << "admin " << address << ":" << server.port();
    if (gateway) std::cout << " gateway " << address << ":" << gateway->port();
    std::cout << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    if (gateway) gateway->stop();
    server.stop();
    node.stop();
    rt.shutdown_services();
  } catch (const std::exception& e) {
    std::cerr << "cvm-node: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
