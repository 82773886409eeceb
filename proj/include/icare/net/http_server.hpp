// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "icare/net/http_types.hpp"

namespace icare::net {

using HttpHandler = std::function<HttpResponse(const HttpRequest&)>;

/// Server side of one accepted WebSocket.
class WsChannel {
 public:
  virtual ~WsChannel() = default;
  /// False once the peer is gone or the server is stopping.
  virtual bool send(const std::string& text) = 0;
  /// Also consumes whatever the peer has sent; a close frame is answered here.
  virtual bool open() = 0;
};

struct WsRoute {
  /// Inspects the upgrade request; a response here refuses the upgrade.
  std::function<std::optional<HttpResponse>(const HttpRequest&)> authorize;
  /// Owns the connection until it returns.
  std::function<void(const HttpRequest&, WsChannel&)> run;
};

/// Blocking HTTP/1.1 + WebSocket server, one thread per connection.
class HttpServer {
 public:
  /// Port 0 binds an ephemeral port; see port().
  HttpServer(const std::string& host, std::uint16_t port, HttpHandler handler, std::optional<WsRoute> ws = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  std::uint16_t port() const noexcept;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace icare::net
