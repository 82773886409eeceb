// SPDX-License-Identifier: Apache-2.0
#include "accept_loop.hpp"

#include <boost/asio/connect.hpp>

namespace icare::net::detail {

namespace asio = boost::asio;
using asio::ip::tcp;

AcceptLoop::AcceptLoop(const std::string& host, std::uint16_t port, Session session)
    : acceptor_(io_), session_(std::move(session)) {
  const tcp::endpoint ep(asio::ip::make_address(host), port);
  acceptor_.open(ep.protocol());
  acceptor_.set_option(tcp::acceptor::reuse_address(true));
  acceptor_.bind(ep);
  acceptor_.listen();
  port_ = acceptor_.local_endpoint().port();
  accept_thread_ = std::thread([this] { run(); });
}

AcceptLoop::~AcceptLoop() { stop(); }

void AcceptLoop::run() {
  while (!stopping_) {
    auto socket = std::make_shared<Socket>(io_);
    boost::system::error_code ec;
    acceptor_.accept(*socket, ec);
    if (stopping_) break;
    if (ec) continue;
    std::lock_guard lock(mutex_);
    reap_finished();
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread t([this, socket, done] {
      try {
        session_(*socket);
      } catch (...) {
      }
      boost::system::error_code ignored;
      socket->shutdown(tcp::socket::shutdown_both, ignored);
      done->store(true);
    });
    workers_.push_back(Worker{socket, std::move(t), done});
  }
}

void AcceptLoop::reap_finished() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done->load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void AcceptLoop::stop() {
  if (stopping_.exchange(true)) return;
  // Wake the blocking accept with a throwaway connection.
  {
    boost::system::error_code ec;
    asio::io_context io;
    tcp::socket poke(io);
    poke.connect(tcp::endpoint(acceptor_.local_endpoint().address(), port_), ec);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  boost::system::error_code ignored;
  acceptor_.close(ignored);
  std::list<Worker> workers;
  {
    std::lock_guard lock(mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.socket->shutdown(tcp::socket::shutdown_both, ignored);
  for (auto& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

}  // namespace icare::net::detail
