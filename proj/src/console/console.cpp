#include "cvm/console/console.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cvm/error.hpp"
#include "cvm/lang/parser.hpp"

namespace cvm::console {

using admin::AdminClient;
using admin::RemoteOutcome;
using admin::Target;

void validate(const ConsoleConfig& config) {
  if (config.targets.empty()) throw Error(Errc::type, "no target: pass --connect host:port or set CVM_TARGETS");
  if (config.mode == Mode::batch && !config.script) throw Error(Errc::type, "batch mode needs --script FILE");
  if (config.mode == Mode::bench && config.targets.size() != 1)
    throw Error(Errc::type, "bench runs against exactly one target");
  if (config.mode == Mode::bench && (config.bench_repetitions == 0 || config.bench_requests == 0))
    throw Error(Errc::type, "bench repetitions and requests must be positive");
}

std::vector<Target> targets_from_env() {
  const char* v = std::getenv("CVM_TARGETS");
  if (v == nullptr) return {};
  return admin::parse_targets(v);
}

int batch_exit_code(const std::vector<RemoteOutcome>& outcomes) {
  for (const auto& o : outcomes)
    if (!o.ok) return kExitFormError;
  return kExitOk;
}

std::string porcelain_line(const RemoteOutcome& o) {
  std::string payload;
  for (const char c : o.text) {
    switch (c) {
      case '\n': payload += "\\n"; break;
      case '\t': payload += "\\t"; break;
      case '\r': payload += "\\r"; break;
      case '\\': payload += "\\\\"; break;
      default: payload += c;
    }
  }
  return fmt::format("{}\t{}\t{}", o.index, o.ok ? "ok" : "err", payload);
}

namespace {

std::string human_line(const RemoteOutcome& o) { return (o.ok ? "ok: " : "error: ") + o.text; }

std::string prefix_for(const Target& t, bool many) { return many ? "[" + t.str() + "] " : std::string(); }

struct Node {
  Target target;
  std::optional<AdminClient> client;
  bool up() const { return client && client->connected(); }
};

bool reconnect(Node& n, std::ostream& err) {
  try {
    n.client.emplace(AdminClient::connect(n.target));
    return true;
  } catch (const Error& e) {
    n.client.reset();
    err << e.what() << "\n";
    return false;
  }
}

bool needs_more_input(const lang::ParseError& e) {
  return e.kind() == lang::ParseErrc::unclosed_list || e.kind() == lang::ParseErrc::unterminated_string;
}

}  // namespace

int run_repl(const ConsoleConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<Node> nodes;
  std::size_t up = 0;
  for (const auto& t : config.targets) {
    auto& n = nodes.emplace_back(Node{t, std::nullopt});
    if (reconnect(n, err)) ++up;
  }
  if (up == 0) return kExitConnection;
  const bool many = nodes.size() > 1;
  std::size_t counter = 0;
  std::string buffer;
  std::string line;

  auto prompt = [&] { out << (buffer.empty() ? "cvm> " : "...> ") << std::flush; };
  auto quit = [&] {
    for (auto& n : nodes)
      if (n.client) n.client->bye();
  };

  for (prompt(); std::getline(in, line); prompt()) {
    if (buffer.empty()) {
      const auto first = line.find_first_not_of(" \t");
      const std::string_view cmd = first == std::string::npos ? std::string_view() : std::string_view(line).substr(first);
      if (cmd.empty()) continue;
      if (cmd.front() == ':') {
        if (cmd == ":quit" || cmd == ":q") {
          quit();
          return kExitOk;
        } else if (cmd == ":nodes") {
          for (const auto& n : nodes) out << n.target.str() << (n.up() ? " connected" : " disconnected") << "\n";
        } else if (cmd == ":reconnect") {
          for (auto& n : nodes) {
            if (n.up()) continue;
            if (reconnect(n, err)) out << prefix_for(n.target, true) << "reconnected\n";
          }
        } else if (cmd == ":help") {
          out << ":quit  :nodes  :reconnect  :help\n";
        } else {
          err << "unknown command " << cmd << " (try :help)\n";
        }
        continue;
      }
    }
    buffer += line;
    buffer += '\n';
    lang::Script script;
    try {
      script = lang::parse(buffer);
    } catch (const lang::ParseError& e) {
      if (needs_more_input(e)) continue;
      err << "parse error: " << e.what() << "\n";
      buffer.clear();
      continue;
    }
    buffer.clear();
    for (const auto& form : script.forms) {
      const auto index = counter++;
      for (auto& n : nodes) {
        const auto pre = prefix_for(n.target, many);
        if (!n.up()) {
          out << pre << "not connected; type :reconnect\n";
          continue;
        }
        try {
          out << pre << human_line(n.client->eval(form, index)) << "\n";
        } catch (const Error& e) {
          out << pre << e.what() << "; type :reconnect to retry\n";
        }
      }
    }
  }
  if (!buffer.empty()) err << "parse error: input ended inside a form\n";
  quit();
  return kExitOk;
}

int run_batch(const ConsoleConfig& config, std::ostream& out, std::ostream& err) {
  std::ifstream file(*config.script);
  if (!file) {
    err << "cannot read " << config.script->string() << "\n";
    return kExitUsage;
  }
  std::stringstream ss;
  ss << file.rdbuf();
  lang::Script script;
  try {
    script = lang::parse(ss.str());
  } catch (const lang::ParseError& e) {
    err << config.script->string() << ":" << e.line() << ":" << e.column() << ": " << e.detail() << "\n";
    return kExitUsage;
  }
  const bool many = config.targets.size() > 1;
  int code = kExitOk;
  for (const auto& t : config.targets) {
    std::vector<RemoteOutcome> outcomes;
    try {
      auto client = AdminClient::connect(t);
      outcomes = client.submit(script, config.keep_going);
    } catch (const Error& e) {
      err << e.what() << "\n";
      code = std::max(code, kExitConnection);
      continue;
    }
    for (const auto& o : outcomes) {
      if (config.porcelain) out << (many ? t.str() + "\t" : "") << porcelain_line(o) << "\n";
      else out << prefix_for(t, many) << "[" << o.index << "] " << human_line(o) << "\n";
    }
    code = std::max(code, batch_exit_code(outcomes));
  }
  return code;
}

int run(const ConsoleConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  switch (config.mode) {
    case Mode::repl: return run_repl(config, in, out, err);
    case Mode::batch: return run_batch(config, out, err);
    case Mode::bench: return run_bench_mode(config, out, err);
  }
  return kExitUsage;
}

}  // namespace cvm::console
