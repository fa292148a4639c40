// Operator console: REPL, batch submission and the bench harness.
#include <CLI11.hpp>
#include <iostream>

#include "cvm/console/console.hpp"
#include "cvm/error.hpp"

int main(int argc, char** argv) {
  using namespace cvm::console;
  CLI::App app{"CVM admin console"};
  std::string connect;
  std::string script;
  bool bench = false;
  ConsoleConfig config;
  app.add_option("--connect", connect, "host:port[,host:port...] (default: $CVM_TARGETS)");
  app.add_option("--script", script, "Submit this script and exit");
  app.add_flag("--bench", bench, "Run the reconfiguration and overhead bench");
  app.add_flag("--keep-going", config.keep_going, "Continue past failing forms");
  app.add_flag("--porcelain", config.porcelain, "One line per form: index<TAB>ok|err<TAB>payload");
  app.add_option("--repetitions", config.bench_repetitions, "Bench repetitions")->capture_default_str();
  app.add_option("--requests", config.bench_requests, "Requests per latency sample")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    config.targets = connect.empty() ? targets_from_env() : cvm::admin::parse_targets(connect);
  } catch (const cvm::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  if (bench && !script.empty()) {
    std::cerr << "--bench and --script are exclusive\n";
    return kExitUsage;
  }
  if (!script.empty()) {
    config.mode = Mode::batch;
    config.script = script;
  } else if (bench) {
    config.mode = Mode::bench;
  }
  return run(config, std::cin, std::cout, std::cerr);
}
