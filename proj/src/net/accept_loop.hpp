// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>

namespace icare::net::detail {

/// Blocking accept loop that hands each connection to `session` on its own
/// thread. stop() shuts every live socket down and joins all threads.
class AcceptLoop {
 public:
  using Socket = boost::asio::ip::tcp::socket;
  using Session = std::function<void(Socket&)>;

  AcceptLoop(const std::string& host, std::uint16_t port, Session session);
  ~AcceptLoop();

  AcceptLoop(const AcceptLoop&) = delete;
  AcceptLoop& operator=(const AcceptLoop&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  bool stopping() const noexcept { return stopping_.load(); }
  void stop();

 private:
  struct Worker {
    std::shared_ptr<Socket> socket;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void run();
  void reap_finished();

  boost::asio::io_context io_;
  boost::asio::ip::tcp::acceptor acceptor_;
  Session session_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::list<Worker> workers_;
  std::thread accept_thread_;
};

}  // namespace icare::net::detail
