// SPDX-License-Identifier: Apache-2.0
#pragma once

// Plain TCP transports: length-prefixed frames (bulk upload) and LF-terminated
// lines (SMS bus, sensor stream).

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icare/protocol/bulk.hpp"

namespace icare::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port". Throws ValidationError.
  static Endpoint parse(std::string_view text);
  std::string to_string() const;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every complete frame is passed to the handler; its return value is written
/// back on the same connection.
class FrameServer {
 public:
  using Handler = std::function<protocol::Bytes(const protocol::Bytes& frame)>;

  FrameServer(const std::string& host, std::uint16_t port, Handler handler);
  ~FrameServer();
  std::uint16_t port() const noexcept;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Every line (without its LF) goes to the handler; a returned string is
/// written back followed by LF.
class LineServer {
 public:
  using Handler = std::function<std::optional<std::string>(const std::string& line)>;

  LineServer(const std::string& host, std::uint16_t port, Handler handler);
  ~LineServer();
  std::uint16_t port() const noexcept;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Sends one frame and waits for one reply frame. Throws TransportError.
protocol::Bytes request_frame(const Endpoint& to, const protocol::Bytes& frame,
                              std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

/// Writes each line (LF appended when missing). Throws TransportError.
void send_lines(const Endpoint& to, const std::vector<std::string>& lines);

}  // namespace icare::net
