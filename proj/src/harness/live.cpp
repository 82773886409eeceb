// SPDX-License-Identifier: Apache-2.0
#include "icare/harness/live.hpp"

#include <cmath>
#include <iostream>

#include "icare/emergency/centre.hpp"
#include "icare/harness/harness.hpp"
#include "icare/net/http_server.hpp"
#include "icare/protocol/json.hpp"
#include "icare/server/http_api.hpp"
#include "icare/server/server.hpp"

namespace icare::harness {

using json = nlohmann::json;

ScaledClock::ScaledClock(double scale) : start_(std::chrono::steady_clock::now()), scale_(scale) {
  if (!(scale > 0)) throw ValidationError("time scale must be positive");
}

Timestamp ScaledClock::now() const {
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start_;
  return static_cast<Timestamp>(std::floor(wall.count() * scale_));
}

std::chrono::steady_clock::duration ScaledClock::until(Timestamp t) const {
  const auto at = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(static_cast<double>(t) / scale_));
  const auto left = at - std::chrono::steady_clock::now();
  return left.count() > 0 ? left : std::chrono::steady_clock::duration::zero();
}

// --- gateway loop ----------------------------------------------------------------

GatewayLoop::GatewayLoop(gateway::Gateway gateway, GatewayRoutes routes, std::shared_ptr<const ScaledClock> clock,
                         EffectSink sink)
    : gateway_(std::move(gateway)), routes_(std::move(routes)), clock_(std::move(clock)), sink_(std::move(sink)) {}

GatewayLoop::~GatewayLoop() { stop(); }

void GatewayLoop::start(const std::string& sensor_listen, const std::string& sms_listen) {
  const auto s = net::Endpoint::parse(sensor_listen);
  const auto m = net::Endpoint::parse(sms_listen);
  sensor_server_ = std::make_unique<net::LineServer>(s.host, s.port, [this](const std::string& line) {
    try {
      auto rec = protocol::decode_record_line(line);
      post([rec](gateway::Gateway& g, Timestamp now) { return g.ingest_sample(rec, now); });
    } catch (const std::exception& e) {
      post([what = std::string(e.what())](gateway::Gateway&, Timestamp) {
        return gateway::Effects{gateway::Warning{"bad sensor line: " + what}};
      });
    }
    return std::optional<std::string>{};
  });
  sms_server_ = std::make_unique<net::LineServer>(m.host, m.port, [this](const std::string& line) {
    post([line](gateway::Gateway& g, Timestamp now) { return g.handle_sms_line(line, now); });
    return std::optional<std::string>{};
  });
  loop_thread_ = std::thread([this] { run(); });
  send_thread_ = std::thread([this] { sender(); });
}

void GatewayLoop::stop() {
  if (stopping_.exchange(true)) return;
  if (sensor_server_) sensor_server_->stop();
  if (sms_server_) sms_server_->stop();
  queue_cv_.notify_all();
  send_cv_.notify_all();
  if (loop_thread_.joinable()) loop_thread_.join();
  if (send_thread_.joinable()) send_thread_.join();
}

std::uint16_t GatewayLoop::sensor_port() const { return sensor_server_ ? sensor_server_->port() : 0; }
std::uint16_t GatewayLoop::sms_port() const { return sms_server_ ? sms_server_->port() : 0; }

void GatewayLoop::post(Op op) {
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(op));
  }
  queue_cv_.notify_all();
}

void GatewayLoop::inspect(const std::function<void(const gateway::Gateway&)>& f) const {
  std::lock_guard lock(mutex_);
  f(gateway_);
}

void GatewayLoop::enqueue_send(std::function<void()> job) {
  {
    std::lock_guard lock(queue_mutex_);
    sends_.push_back(std::move(job));
  }
  send_cv_.notify_all();
}

void GatewayLoop::apply(const Op& op, Timestamp now) {
  gateway::Effects effects;
  {
    std::lock_guard lock(mutex_);
    effects = op(gateway_, now);
  }
  for (const auto& effect : effects) {
    if (sink_) sink_(now, effect);
    if (const auto* sms = std::get_if<gateway::SmsOut>(&effect)) {
      const auto it = routes_.sms.find(sms->target);
      if (it == routes_.sms.end()) {
        if (sink_) sink_(now, gateway::Warning{"no SMS route for target " + sms->target});
        continue;
      }
      enqueue_send([this, to = it->second, line = sms->line] {
        try {
          net::send_lines(to, {line});
        } catch (const net::TransportError& e) {
          post([what = std::string(e.what())](gateway::Gateway&, Timestamp) {
            return gateway::Effects{gateway::Warning{"SMS send failed: " + what}};
          });
        }
      });
    } else if (const auto* bulk = std::get_if<gateway::BulkOut>(&effect)) {
      if (!routes_.server_bulk) continue;
      enqueue_send([this, to = *routes_.server_bulk, frame = bulk->frame] {
        try {
          const auto ack = protocol::unframe_ack(net::request_frame(to, protocol::frame_bulk(frame)));
          post([ack](gateway::Gateway& g, Timestamp now) { return g.on_ack(ack, now); });
        } catch (const std::exception&) {
          post([id = frame.frame_id](gateway::Gateway& g, Timestamp now) { return g.on_transport_failure(id, now); });
        }
      });
    }
  }
}

void GatewayLoop::run() {
  while (!stopping_) {
    std::deque<Op> batch;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait_for(lock, clock_->until(last_tick_ + 1), [&] { return stopping_ || !queue_.empty(); });
      batch.swap(queue_);
    }
    for (const auto& op : batch) apply(op, clock_->now());
    const auto now = clock_->now();
    while (last_tick_ < now && !stopping_) {
      ++last_tick_;
      apply([](gateway::Gateway& g, Timestamp t) { return g.tick(t); }, last_tick_);
    }
  }
}

void GatewayLoop::sender() {
  while (true) {
    std::function<void()> job;
    {
      std::unique_lock lock(queue_mutex_);
      send_cv_.wait(lock, [&] { return stopping_ || !sends_.empty(); });
      if (sends_.empty()) return;
      job = std::move(sends_.front());
      sends_.pop_front();
    }
    job();
  }
}

// --- whole system ---------------------------------------------------------------

namespace {

std::string loopback(std::uint16_t port) { return "127.0.0.1:" + std::to_string(port); }

}  // namespace

RunReport run_live(const sensors::Scenario& sc, const LiveOptions& options) {
  auto clock = std::make_shared<ScaledClock>(options.time_scale);
  const auto& elder = sc.gateway.elder_id;

  std::mutex log_mutex;
  Sha256 digest;
  std::uint64_t log_lines = 0;
  auto log = [&](const json& entry) {
    std::lock_guard lock(log_mutex);
    const auto line = entry.dump();
    digest.update(line);
    digest.update("\n");
    ++log_lines;
    if (options.log_sink) options.log_sink(line);
  };

  // Server with its HTTP API and bulk listener.
  server::Server srv(server::build_directory(directory_seed_for(sc)));
  server::HttpApi api(srv, [clock] { return clock->now(); });
  const auto http_ep = net::Endpoint::parse(options.http_listen);
  net::HttpServer http(http_ep.host, http_ep.port, [&api](const net::HttpRequest& r) { return api.handle(r); },
                       api.live_route());
  net::FrameServer bulk_server("127.0.0.1", 0, [&srv](const protocol::Bytes& frame) { return srv.ingest_frame(frame); });

  // Emergency centre and a family inbox.
  emergency::EmergencyCentre centre;
  std::atomic<std::uint64_t> duplicates{0};
  net::LineServer centre_sms("127.0.0.1", 0, [&](const std::string& line) {
    const auto r = centre.receive_alarm(line, clock->now());
    if (r.outcome == emergency::IntakeOutcome::Duplicate) ++duplicates;
    log(json{{"t", clock->now()}, {"emergency", to_string(r.outcome)}});
    return std::optional<std::string>{};
  });
  const auto ec_ep = net::Endpoint::parse(options.emergency_http_listen);
  net::HttpServer centre_http(ec_ep.host, ec_ep.port, [&centre](const net::HttpRequest& r) { return centre.handle_http(r); });
  std::atomic<std::uint64_t> family{0};
  net::LineServer family_sms("127.0.0.1", 0, [&](const std::string&) {
    ++family;
    return std::optional<std::string>{};
  });

  GatewayRoutes routes;
  routes.server_bulk = net::Endpoint::parse(loopback(bulk_server.port()));
  for (const auto& target : sc.gateway.alarm_targets) {
    routes.sms[target] = net::Endpoint::parse(loopback(target == sc.emergency_target ? centre_sms.port()
                                                                                      : family_sms.port()));
  }

  std::mutex report_mutex;
  std::vector<gateway::AlarmDispatched> dispatched;
  std::vector<ReminderReport> reminders;
  std::uint64_t cancelled = 0, warnings = 0;
  auto sink = [&](Timestamp t, const gateway::Effect& e) {
    log(json{{"t", t}, {"gateway", gateway::effect_to_json(e)}});
    std::lock_guard lock(report_mutex);
    if (const auto* d = std::get_if<gateway::AlarmDispatched>(&e)) dispatched.push_back(*d);
    if (std::holds_alternative<gateway::AlarmCancelled>(e)) ++cancelled;
    if (std::holds_alternative<gateway::Warning>(e)) ++warnings;
    if (const auto* r = std::get_if<gateway::ReminderFired>(&e)) {
      reminders.push_back({r->reminder.due, std::string(gateway::to_string(r->reminder.kind)), r->reminder.rule_id,
                           r->reminder.text});
    }
  };

  std::optional<protocol::Location> fix;
  bool fix_lost = false;
  std::mutex fix_mutex;
  gateway::Gateway gw(sc.gateway,
                      [&](Timestamp) -> std::optional<protocol::Location> {
                        std::lock_guard lock(fix_mutex);
                        if (fix_lost) return std::nullopt;
                        return fix;
                      },
                      scripted_weather(sc.weather));
  GatewayLoop loop(std::move(gw), routes, clock, sink);
  loop.start("127.0.0.1:0", "127.0.0.1:0");
  const net::Endpoint gateway_sms = net::Endpoint::parse(loopback(loop.sms_port()));
  const net::Endpoint gateway_sensors = net::Endpoint::parse(loopback(loop.sensor_port()));

  srv.set_sms_sink([&](const std::string&, const std::string& line) {
    try {
      net::send_lines(gateway_sms, {line});
    } catch (const net::TransportError& e) {
      log(json{{"t", clock->now()}, {"server", "sms send failed"}, {"error", e.what()}});
    }
  });

  std::cerr << "live: server API http://" << http_ep.host << ":" << http.port() << ", emergency http://"
            << ec_ep.host << ":" << centre_http.port() << ", gateway sensors " << gateway_sensors.to_string()
            << ", gateway sms " << gateway_sms.to_string() << "\n";

  // Drive sensors and scenario events on the wall clock.
  std::map<std::string, std::uint64_t> seqs;
  std::uint64_t generated = 0;
  std::size_t next_event = 0;
  for (Timestamp t = 0; t <= sc.horizon_s; ++t) {
    std::this_thread::sleep_for(clock->until(t));
    while (next_event < sc.events.size() && sc.events[next_event].ts == t) {
      const auto& ev = sc.events[next_event++];
      log(json{{"t", t}, {"scenario_event", ev.line}});
      try {
        std::visit(
            [&](const auto& a) {
              using T = std::decay_t<decltype(a)>;
              if constexpr (std::is_same_v<T, sensors::InjectSms>) {
                net::send_lines(gateway_sms, {a.line});
              } else if constexpr (std::is_same_v<T, sensors::UserResponse>) {
                loop.post([a](gateway::Gateway& g, Timestamp now) {
                  return g.respond_to_alarm_prompt(a.channel, a.response, now);
                });
              } else if constexpr (std::is_same_v<T, sensors::PressQuickAlarm>) {
                loop.post([](gateway::Gateway& g, Timestamp now) { return g.quick_alarm(now); });
              } else if constexpr (std::is_same_v<T, sensors::DoctorThreshold>) {
                srv.set_threshold(a.doctor_id, elder, a.channel, a.low, a.high, t);
              } else if constexpr (std::is_same_v<T, sensors::DoctorAdvice>) {
                srv.send_advice(a.doctor_id, elder, a.text, t);
              } else if constexpr (std::is_same_v<T, sensors::SwitchMode>) {
                loop.post([a](gateway::Gateway& g, Timestamp now) { return g.set_mode(a.mode, now); });
              } else if constexpr (std::is_same_v<T, sensors::DropNext>) {
                // Real sockets have no drop schedule.
              } else if constexpr (std::is_same_v<T, sensors::MoveTo>) {
                std::lock_guard lock(fix_mutex);
                fix_lost = !a.location.has_value();
                if (a.location) fix = a.location;
              }
            },
            ev.action);
      } catch (const std::exception& e) {
        throw RunError(t, e.what());
      }
    }
    std::vector<std::string> lines;
    for (const auto& spec : sc.sensors) {
      auto& seq = seqs[spec.sensor_id];
      if (auto rec = sensors::generate_sample(spec, elder, t, seq + 1)) {
        ++seq;
        ++generated;
        lines.push_back(protocol::encode_record_line(*rec));
      }
    }
    if (!lines.empty()) net::send_lines(gateway_sensors, lines);
  }

  // Let sync settle.
  const auto drain = options.drain_s > 0 ? options.drain_s : 2 * sc.gateway.bulk_interval_s + 5;
  for (Timestamp t = sc.horizon_s + 1; t <= sc.horizon_s + drain; ++t) {
    std::this_thread::sleep_for(clock->until(t));
    bool settled = false;
    loop.inspect([&](const gateway::Gateway& g) { settled = g.store().pending_total() == 0 && g.in_flight() == 0; });
    if (settled) break;
  }
  loop.stop();

  RunReport r;
  r.scenario = sc.name;
  r.horizon_s = sc.horizon_s;
  r.end_ts = clock->now();
  r.episodes = episode_reports(dispatched, centre.list_dispatches(elder));
  r.cancelled = cancelled;
  r.dispatches = centre.dispatch_count();
  r.duplicate_alarms = duplicates;
  r.family_messages = family;
  r.records_generated = generated;
  r.records_synced = srv.record_count(elder);
  std::set<server::HealthRecordStore::RecordKey> local;
  loop.inspect([&](const gateway::Gateway& g) {
    for (const auto& rec : g.store().history()) local.emplace(rec.sensor_id, rec.seq);
  });
  r.stores_match = local == srv.record_keys(elder);
  for (const auto& m : reminders) (m.kind == "medicine" ? r.medicine_reminders : r.climate_reminders)++;
  r.reminders = reminders;
  r.warnings = warnings;
  r.log_lines = log_lines;
  r.digest = digest.hex();
  return r;
}

}  // namespace icare::harness
