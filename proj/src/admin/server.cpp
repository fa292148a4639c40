#include "cvm/admin/server.hpp"

#include <sys/socket.h>

#include <boost/asio.hpp>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cvm/lang/codec.hpp"
#include "cvm/lang/parser.hpp"
#include "cvm/util/thread_label.hpp"

namespace cvm::admin {

namespace asio = boost::asio;
using asio::ip::tcp;

void run_bootstrap(core::Cvm& cvm, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read bootstrap script " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto script = lang::parse(ss.str());
  for (std::size_t i = 0; i < script.forms.size(); ++i) {
    const auto o = cvm.execute(script.forms[i], i);
    if (!o.ok) throw Error(o.code, "bootstrap form " + std::to_string(i) + " failed: " + o.error);
  }
}

std::optional<std::filesystem::path> bootstrap_path_from_env() {
  const char* v = std::getenv("CVM_BOOTSTRAP");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::filesystem::path(v);
}

namespace {

struct Counters {
  std::atomic<std::uint64_t> sessions{0};
  std::atomic<std::uint64_t> frames_in{0};
  std::atomic<std::uint64_t> frames_out{0};
  std::atomic<std::uint64_t> errors{0};
  std::atomic<std::uint64_t> rejected{0};
};

struct Session {
  std::shared_ptr<tcp::socket> socket;
  std::thread thread;
  std::atomic<bool> finished{false};
};

void write_frame(tcp::socket& s, const Frame& f, Counters& c) {
  asio::write(s, asio::buffer(encode_frame(f)));
  ++c.frames_out;
  if (f.type == MsgType::error) ++c.errors;
}

// Serves one connection until BYE, EOF, a bad header or shutdown.
void serve_session(core::Cvm& cvm, tcp::socket& s, Counters& c) {
  std::array<std::uint8_t, kHeaderSize> head{};
  Bytes payload;
  for (;;) {
    boost::system::error_code ec;
    asio::read(s, asio::buffer(head), ec);
    if (ec) return;
    const auto h = parse_header(head);
    if (!h.header) {
      ++c.rejected;
      return;  // bad magic/version/type/length: drop the connection
    }
    payload.resize(h.header->payload_len);
    asio::read(s, asio::buffer(payload), ec);
    if (ec) return;
    ++c.frames_in;

    switch (h.header->type) {
      case MsgType::bye:
        return;
      case MsgType::ping:
        if (!payload.empty()) write_frame(s, Frame::error("protocol: PING must have an empty payload"), c);
        else write_frame(s, Frame::control(MsgType::pong), c);
        break;
      case MsgType::eval: {
        std::optional<lang::AstNode> form;
        try {
          auto [node, used] = lang::decode_ast(payload);
          if (used != payload.size()) {
            write_frame(s, Frame::error("decode: trailing bytes after the form"), c);
            break;
          }
          form = std::move(node);
        } catch (const Error& e) {
          write_frame(s, Frame::error(std::string("decode: ") + e.what()), c);
          break;
        }
        const auto outcome = cvm.execute(std::move(*form));
        if (outcome.ok) write_frame(s, Frame::result(outcome.value), c);
        else write_frame(s, Frame::error(outcome.error), c);
        break;
      }
      default:
        write_frame(s, Frame::error(std::string("protocol: unexpected ") + to_string(h.header->type) + " from client"),
                    c);
    }
  }
}

}  // namespace

struct AdminServer::Impl {
  Impl(core::Cvm& cvm, ServerConfig config) : cvm(cvm), config(std::move(config)), acceptor(io) {}

  void accept_next() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;  // closed
      launch(std::move(socket));
      accept_next();
    });
  }

  void launch(tcp::socket socket) {
    std::lock_guard lock(mutex);
    if (stopping) return;
    reap_locked();
    socket.set_option(tcp::no_delay(true));
    auto& s = sessions.emplace_back();
    s.socket = std::make_shared<tcp::socket>(std::move(socket));
    ++counters.sessions;
    s.thread = std::thread([this, &s, n = counters.sessions.load()] {
      set_this_thread_label("admin-session-" + std::to_string(n));
      try {
        serve_session(cvm, *s.socket, counters);
      } catch (const std::exception&) {
        // peer vanished mid-write
      }
      boost::system::error_code ignored;
      s.socket->shutdown(tcp::socket::shutdown_both, ignored);
      s.finished = true;
    });
  }

  void reap_locked() {
    for (auto it = sessions.begin(); it != sessions.end();) {
      if (it->finished) {
        it->thread.join();
        it = sessions.erase(it);
      } else {
        ++it;
      }
    }
  }

  core::Cvm& cvm;
  ServerConfig config;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::mutex mutex;
  std::list<Session> sessions;
  bool stopping = false;
  Counters counters;
};

AdminServer::AdminServer(core::Cvm& cvm, ServerConfig config)
    : impl_(std::make_unique<Impl>(cvm, std::move(config))) {}

AdminServer::~AdminServer() { stop(); }

void AdminServer::start() {
  if (impl_->io_thread.joinable()) return;
  auto& im = *impl_;
  try {
    const tcp::endpoint ep(asio::ip::make_address(im.config.address), im.config.port);
    im.acceptor.open(ep.protocol());
    im.acceptor.set_option(tcp::acceptor::reuse_address(true));
    im.acceptor.bind(ep);
    im.acceptor.listen();
  } catch (const boost::system::system_error& e) {
    if (im.acceptor.is_open()) im.acceptor.close();
    throw Error(Errc::io, "cannot listen on " + im.config.address + ":" + std::to_string(im.config.port) + ": " +
                              e.what());
  }
  port_ = im.acceptor.local_endpoint().port();
  im.cvm.start();
  im.accept_next();
  im.io_thread = std::thread([&im] {
    set_this_thread_label("admin-accept");
    im.io.run();
  });
}

void AdminServer::stop() {
  auto& im = *impl_;
  if (!im.io_thread.joinable()) return;
  asio::post(im.io, [&im] {
    boost::system::error_code ignored;
    im.acceptor.close(ignored);
  });
  im.io_thread.join();
  std::list<Session> sessions;
  {
    std::lock_guard lock(im.mutex);
    im.stopping = true;
    sessions.swap(im.sessions);
  }
  // shutdown(2) wakes a thread blocked in read on the same socket.
  for (auto& s : sessions) ::shutdown(s.socket->native_handle(), SHUT_RDWR);
  for (auto& s : sessions) s.thread.join();
  im.io.restart();
  {
    std::lock_guard lock(im.mutex);
    im.stopping = false;
  }
}

ServerStats AdminServer::stats() const {
  const auto& c = impl_->counters;
  return {c.sessions.load(), c.frames_in.load(), c.frames_out.load(), c.errors.load(), c.rejected.load()};
}

}  // namespace cvm::admin
