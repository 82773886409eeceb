// SPDX-License-Identifier: Apache-2.0
#include "icare/net/http_server.hpp"

#include <atomic>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "accept_loop.hpp"

namespace icare::net {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

namespace {

class BeastWsChannel final : public WsChannel {
 public:
  BeastWsChannel(websocket::stream<tcp::socket&>& ws, const detail::AcceptLoop& loop) : ws_(ws), loop_(loop) {}

  bool send(const std::string& text) override {
    if (!open()) return false;
    beast::error_code ec;
    ws_.text(true);
    ws_.write(boost::asio::buffer(text), ec);
    if (ec) closed_ = true;
    return !ec;
  }

  bool open() override {
    if (closed_ || loop_.stopping() || !ws_.is_open()) return false;
    // Inbound frames are ignored, but reading them is what answers a close.
    beast::error_code ec;
    while (!closed_ && ws_.next_layer().available(ec) > 0 && !ec) {
      ws_.read(inbound_, ec);
      inbound_.clear();
      if (ec) closed_ = true;
    }
    return !closed_;
  }

 private:
  websocket::stream<tcp::socket&>& ws_;
  const detail::AcceptLoop& loop_;
  beast::flat_buffer inbound_;
  bool closed_ = false;
};

http::response<http::string_body> to_beast(const HttpResponse& r, unsigned version, bool keep_alive) {
  http::response<http::string_body> res{static_cast<http::status>(r.status), version};
  res.set(http::field::server, "icare");
  res.set(http::field::content_type, r.content_type);
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(keep_alive);
  res.body() = r.body;
  res.prepare_payload();
  return res;
}

}  // namespace

struct HttpServer::Impl {
  HttpHandler handler;
  std::optional<WsRoute> ws;
  std::unique_ptr<detail::AcceptLoop> loop;

  void session(tcp::socket& socket) {
    beast::flat_buffer buffer;
    while (!loop->stopping()) {
      http::request<http::string_body> req;
      beast::error_code ec;
      http::read(socket, buffer, req, ec);
      if (ec) return;

      auto request = HttpRequest::from_target(std::string(req.method_string()), std::string(req.target()), req.body(),
                                              std::string(req[http::field::authorization]));

      if (websocket::is_upgrade(req)) {
        if (!ws) {
          http::write(socket, to_beast(HttpResponse{404, R"({"error":"no websocket here"})"}, req.version(), false), ec);
          return;
        }
        if (auto refusal = ws->authorize(request)) {
          http::write(socket, to_beast(*refusal, req.version(), false), ec);
          return;
        }
        websocket::stream<tcp::socket&> stream(socket);
        stream.accept(req, ec);
        if (ec) return;
        BeastWsChannel channel(stream, *loop);
        ws->run(request, channel);
        if (stream.is_open()) stream.close(websocket::close_code::normal, ec);
        return;
      }

      HttpResponse response;
      if (req.method() == http::verb::options) {
        response = HttpResponse{204, ""};
      } else {
        try {
          response = handler(request);
        } catch (const std::exception&) {
          response = HttpResponse{500, std::string(R"({"error":"internal error"})")};
        }
      }
      auto res = to_beast(response, req.version(), req.keep_alive());
      if (req.method() == http::verb::options) {
        res.set(http::field::access_control_allow_methods, "GET, POST, PUT, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Authorization, Content-Type");
      }
      http::write(socket, res, ec);
      if (ec || !req.keep_alive()) return;
    }
  }
};

HttpServer::HttpServer(const std::string& host, std::uint16_t port, HttpHandler handler, std::optional<WsRoute> ws)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->ws = std::move(ws);
  impl_->loop = std::make_unique<detail::AcceptLoop>(host, port, [impl = impl_.get()](tcp::socket& s) { impl->session(s); });
}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::port() const noexcept { return impl_->loop->port(); }

void HttpServer::stop() {
  if (impl_ && impl_->loop) impl_->loop->stop();
}

}  // namespace icare::net
