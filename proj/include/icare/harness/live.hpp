// SPDX-License-Identifier: Apache-2.0
#pragma once

// Wall-clock operation: the same components as the simulation, joined by real
// sockets instead of scripted links.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "icare/gateway/gateway.hpp"
#include "icare/harness/report.hpp"
#include "icare/net/stream.hpp"
#include "icare/sensors/scenario.hpp"

namespace icare::harness {

using Clock = std::function<Timestamp()>;

/// Seconds since construction, optionally sped up: with scale 10 one wall
/// second is ten clock seconds.
class ScaledClock {
 public:
  explicit ScaledClock(double scale = 1.0);
  Timestamp now() const;
  /// Wall time until clock second `t` begins.
  std::chrono::steady_clock::duration until(Timestamp t) const;
  double scale() const noexcept { return scale_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double scale_;
};

struct GatewayRoutes {
  std::optional<net::Endpoint> server_bulk;   // bulk frames go here
  std::map<std::string, net::Endpoint> sms;   // alarm target -> SMS line endpoint
};

/// Runs a Gateway on one thread: sensor lines, inbound SMS, acks and 1 Hz
/// ticks are queued and applied in arrival order. Network sends happen on a
/// separate sender thread so a slow peer never stalls monitoring.
class GatewayLoop {
 public:
  using EffectSink = std::function<void(Timestamp, const gateway::Effect&)>;
  using Op = std::function<gateway::Effects(gateway::Gateway&, Timestamp)>;

  GatewayLoop(gateway::Gateway gateway, GatewayRoutes routes, std::shared_ptr<const ScaledClock> clock,
              EffectSink sink = {});
  ~GatewayLoop();

  GatewayLoop(const GatewayLoop&) = delete;
  GatewayLoop& operator=(const GatewayLoop&) = delete;

  /// Opens the sensor and SMS listeners ("host:port"; port 0 picks one) and
  /// starts the loop.
  void start(const std::string& sensor_listen, const std::string& sms_listen);
  void stop();

  std::uint16_t sensor_port() const;
  std::uint16_t sms_port() const;

  void post(Op op);
  /// Runs `f` against the gateway on the caller's thread, serialised with the loop.
  void inspect(const std::function<void(const gateway::Gateway&)>& f) const;

 private:
  void run();
  void apply(const Op& op, Timestamp now);
  void sender();
  void enqueue_send(std::function<void()> job);

  mutable std::mutex mutex_;  // gateway_
  gateway::Gateway gateway_;
  GatewayRoutes routes_;
  std::shared_ptr<const ScaledClock> clock_;
  EffectSink sink_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<Op> queue_;
  std::deque<std::function<void()>> sends_;
  std::condition_variable send_cv_;
  std::atomic<bool> stopping_{false};
  Timestamp last_tick_ = -1;

  std::unique_ptr<net::LineServer> sensor_server_;
  std::unique_ptr<net::LineServer> sms_server_;
  std::thread loop_thread_;
  std::thread send_thread_;
};

struct LiveOptions {
  double time_scale = 1.0;
  std::string http_listen = "127.0.0.1:8080";  // server API for the console
  std::string emergency_http_listen = "127.0.0.1:8081";
  /// Wall-clock budget after the horizon for sync to settle, in clock seconds.
  Timestamp drain_s = 0;  // 0 = two bulk intervals
  std::function<void(const std::string&)> log_sink;
};

/// Runs a scenario in real time over sockets. The report has the same shape
/// as the simulated one; link counts are empty and the digest covers this
/// particular run only.
RunReport run_live(const sensors::Scenario& scenario, const LiveOptions& options = {});

}  // namespace icare::harness
