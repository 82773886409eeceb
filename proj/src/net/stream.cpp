// SPDX-License-Identifier: Apache-2.0
#include "icare/net/stream.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <span>

#include <boost/asio/connect.hpp>
#include <boost/asio/read.hpp>
#include <boost/asio/read_until.hpp>
#include <boost/asio/streambuf.hpp>
#include <boost/asio/write.hpp>

#include "accept_loop.hpp"
#include "icare/common/errors.hpp"

namespace icare::net {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ValidationError("endpoint must be host:port, got '" + std::string(text) + "'");
  }
  unsigned port = 0;
  const auto p = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
  if (ec != std::errc{} || ptr != p.data() + p.size() || port > 65535) {
    throw ValidationError("bad port in '" + std::string(text) + "'");
  }
  return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

// --- servers -------------------------------------------------------------------

struct FrameServer::Impl {
  Handler handler;
  std::unique_ptr<detail::AcceptLoop> loop;

  void session(tcp::socket& socket) {
    protocol::FrameReader reader;
    std::array<std::uint8_t, 8192> chunk{};
    while (true) {
      boost::system::error_code ec;
      const auto n = socket.read_some(asio::buffer(chunk), ec);
      if (ec) return;
      reader.feed(std::span<const std::uint8_t>(chunk.data(), n));
      while (auto frame = reader.next()) {
        const auto reply = handler(*frame);
        asio::write(socket, asio::buffer(reply), ec);
        if (ec) return;
      }
    }
  }
};

FrameServer::FrameServer(const std::string& host, std::uint16_t port, Handler handler)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->loop = std::make_unique<detail::AcceptLoop>(host, port, [impl = impl_.get()](tcp::socket& s) { impl->session(s); });
}
FrameServer::~FrameServer() { stop(); }
std::uint16_t FrameServer::port() const noexcept { return impl_->loop->port(); }
void FrameServer::stop() {
  if (impl_ && impl_->loop) impl_->loop->stop();
}

struct LineServer::Impl {
  Handler handler;
  std::unique_ptr<detail::AcceptLoop> loop;

  void session(tcp::socket& socket) {
    asio::streambuf buf;
    while (true) {
      boost::system::error_code ec;
      asio::read_until(socket, buf, '\n', ec);
      if (ec && buf.size() == 0) return;
      std::istream in(&buf);
      std::string line;
      if (!std::getline(in, line)) return;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (auto reply = handler(line)) {
        *reply += '\n';
        asio::write(socket, asio::buffer(*reply), ec);
      }
      if (ec) return;
    }
  }
};

LineServer::LineServer(const std::string& host, std::uint16_t port, Handler handler)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->loop = std::make_unique<detail::AcceptLoop>(host, port, [impl = impl_.get()](tcp::socket& s) { impl->session(s); });
}
LineServer::~LineServer() { stop(); }
std::uint16_t LineServer::port() const noexcept { return impl_->loop->port(); }
void LineServer::stop() {
  if (impl_ && impl_->loop) impl_->loop->stop();
}

// --- clients -------------------------------------------------------------------

namespace {

tcp::socket connect(asio::io_context& io, const Endpoint& to) {
  tcp::resolver resolver(io);
  boost::system::error_code ec;
  const auto results = resolver.resolve(to.host, std::to_string(to.port), ec);
  if (ec) throw TransportError("resolve " + to.to_string() + ": " + ec.message());
  tcp::socket socket(io);
  asio::connect(socket, results, ec);
  if (ec) throw TransportError("connect " + to.to_string() + ": " + ec.message());
  return socket;
}

}  // namespace

protocol::Bytes request_frame(const Endpoint& to, const protocol::Bytes& frame, std::chrono::milliseconds timeout) {
  asio::io_context io;
  auto socket = connect(io, to);
  boost::system::error_code ec;
  asio::write(socket, asio::buffer(frame), ec);
  if (ec) throw TransportError("send " + to.to_string() + ": " + ec.message());

  // Read with a deadline: run the reads asynchronously and bound run_for.
  protocol::FrameReader reader;
  std::array<std::uint8_t, 4096> chunk{};
  std::optional<protocol::Bytes> reply;
  bool failed = false;
  std::function<void()> read_more = [&] {
    socket.async_read_some(asio::buffer(chunk), [&](boost::system::error_code e, std::size_t n) {
      if (e) {
        failed = true;
        return;
      }
      reader.feed(std::span<const std::uint8_t>(chunk.data(), n));
      if ((reply = reader.next())) return;
      read_more();
    });
  };
  read_more();
  io.run_for(timeout);
  if (!reply) {
    throw TransportError(failed ? "connection closed before reply from " + to.to_string()
                                : "timed out waiting for reply from " + to.to_string());
  }
  return *reply;
}

void send_lines(const Endpoint& to, const std::vector<std::string>& lines) {
  asio::io_context io;
  auto socket = connect(io, to);
  std::string payload;
  for (const auto& l : lines) {
    payload += l;
    if (l.empty() || l.back() != '\n') payload += '\n';
  }
  boost::system::error_code ec;
  asio::write(socket, asio::buffer(payload), ec);
  if (ec) throw TransportError("send " + to.to_string() + ": " + ec.message());
  socket.shutdown(tcp::socket::shutdown_send, ec);
}

}  // namespace icare::net
