#include "cvm/admin/client.hpp"

#include <boost/asio.hpp>
#include <charconv>

#include "cvm/error.hpp"
#include "cvm/lang/codec.hpp"
#include "cvm/lang/printer.hpp"

namespace cvm::admin {

namespace asio = boost::asio;
using asio::ip::tcp;

Target parse_target(std::string_view text) {
  Target t;
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    t.host = std::string(text);
  } else {
    t.host = std::string(text.substr(0, colon));
    const auto digits = text.substr(colon + 1);
    unsigned v = 0;
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || p != digits.data() + digits.size() || v == 0 || v > 65535)
      throw Error(Errc::type, "bad port in target '" + std::string(text) + "'");
    t.port = static_cast<std::uint16_t>(v);
  }
  if (t.host.empty()) throw Error(Errc::type, "missing host in target '" + std::string(text) + "'");
  return t;
}

std::vector<Target> parse_targets(std::string_view text) {
  std::vector<Target> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!piece.empty()) out.push_back(parse_target(piece));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

lang::AstNode RemoteOutcome::result() const { return lang::decode_ast(payload).first; }

struct AdminClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
  bool open = false;
};

AdminClient::AdminClient(std::unique_ptr<Impl> impl, Target target)
    : impl_(std::move(impl)), target_(std::move(target)) {}
AdminClient::AdminClient(AdminClient&&) noexcept = default;
AdminClient& AdminClient::operator=(AdminClient&&) noexcept = default;

AdminClient::~AdminClient() {
  if (impl_ && impl_->open) {
    try {
      bye();
    } catch (...) {
    }
  }
}

AdminClient AdminClient::connect(const Target& target) {
  auto impl = std::make_unique<Impl>();
  boost::system::error_code ec;
  tcp::resolver resolver(impl->io);
  const auto endpoints = resolver.resolve(target.host, std::to_string(target.port), ec);
  if (ec) throw Error(Errc::connection_refused, "cannot resolve " + target.str() + ": " + ec.message());
  asio::connect(impl->socket, endpoints, ec);
  if (ec) throw Error(Errc::connection_refused, "cannot connect to " + target.str() + ": " + ec.message());
  impl->socket.set_option(tcp::no_delay(true));
  impl->open = true;
  return AdminClient(std::move(impl), target);
}

bool AdminClient::connected() const noexcept { return impl_ && impl_->open; }

void AdminClient::send(const Frame& frame) {
  if (!connected()) throw Error(Errc::connection_lost, "not connected to " + target_.str());
  const auto bytes = encode_frame(frame);
  if (const auto problem = validate_frame(bytes)) throw Error(Errc::protocol, "refusing to send frame: " + *problem);
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(bytes), ec);
  if (ec) {
    impl_->open = false;
    throw Error(Errc::connection_lost, "write to " + target_.str() + " failed: " + ec.message());
  }
}

Frame AdminClient::receive() {
  if (!connected()) throw Error(Errc::connection_lost, "not connected to " + target_.str());
  std::array<std::uint8_t, kHeaderSize> head{};
  boost::system::error_code ec;
  asio::read(impl_->socket, asio::buffer(head), ec);
  if (ec) {
    impl_->open = false;
    throw Error(Errc::connection_lost, "connection to " + target_.str() + " lost: " + ec.message());
  }
  const auto h = parse_header(head);
  if (!h.header) {
    impl_->open = false;
    throw Error(Errc::protocol, std::string("server sent a bad frame: ") + to_string(h.problem));
  }
  Frame f{h.header->type, Bytes(h.header->payload_len)};
  asio::read(impl_->socket, asio::buffer(f.payload), ec);
  if (ec) {
    impl_->open = false;
    throw Error(Errc::connection_lost, "connection to " + target_.str() + " lost: " + ec.message());
  }
  return f;
}

RemoteOutcome AdminClient::eval(const lang::AstNode& form, std::size_t index) {
  send(Frame::eval(form));
  Frame reply = receive();
  RemoteOutcome out;
  out.index = index;
  if (reply.type == MsgType::result) {
    try {
      out.text = lang::print(lang::decode_ast(reply.payload).first);
    } catch (const Error& e) {
      throw Error(Errc::protocol, std::string("undecodable RESULT: ") + e.what());
    }
    out.ok = true;
    out.payload = std::move(reply.payload);
  } else if (reply.type == MsgType::error) {
    out.text.assign(reply.payload.begin(), reply.payload.end());
  } else {
    throw Error(Errc::protocol, std::string("expected RESULT or ERROR, got ") + to_string(reply.type));
  }
  return out;
}

std::vector<RemoteOutcome> AdminClient::submit(const lang::Script& script, bool keep_going) {
  std::vector<RemoteOutcome> out;
  for (std::size_t i = 0; i < script.forms.size(); ++i) {
    out.push_back(eval(script.forms[i], i));
    if (!out.back().ok && !keep_going) break;
  }
  return out;
}

std::chrono::microseconds AdminClient::ping() {
  const auto t0 = std::chrono::steady_clock::now();
  send(Frame::control(MsgType::ping));
  const auto reply = receive();
  if (reply.type != MsgType::pong || !reply.payload.empty())
    throw Error(Errc::protocol, std::string("expected PONG, got ") + to_string(reply.type));
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0);
}

void AdminClient::bye() {
  if (!connected()) return;
  try {
    send(Frame::control(MsgType::bye));
  } catch (const Error&) {
  }
  boost::system::error_code ignored;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ignored);
  impl_->socket.close(ignored);
  impl_->open = false;
}

}  // namespace cvm::admin
