// SPDX-License-Identifier: Apache-2.0
#include "icare/harness/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "icare/protocol/bulk.hpp"
#include "icare/protocol/sms.hpp"

namespace icare::harness {

using json = nlohmann::json;
namespace fs = std::filesystem;

server::DirectorySeed directory_seed_for(const sensors::Scenario& sc) {
  server::DirectorySeed seed;
  const auto& elder = sc.gateway.elder_id;
  if (sc.users.empty()) {
    seed.users.push_back({elder, server::Role::Elderly, elder, "token-" + elder});
    seed.users.push_back({"D01", server::Role::Doctor, "D01", "token-D01"});
    seed.assignments.emplace_back("D01", elder);
  } else {
    for (const auto& u : sc.users) {
      const auto role = server::parse_role(u.role);
      if (!role) throw ValidationError("unknown role '" + u.role + "' for user " + u.user_id);
      seed.users.push_back({u.user_id, *role, u.display_name, u.token});
    }
    const bool has_elder = std::any_of(seed.users.begin(), seed.users.end(),
                                       [&](const server::UserAccount& a) { return a.user_id == elder; });
    if (!has_elder) seed.users.push_back({elder, server::Role::Elderly, elder, "token-" + elder});
  }
  seed.assignments.insert(seed.assignments.end(), sc.assignments.begin(), sc.assignments.end());
  seed.grants = sc.grants;
  return seed;
}

gateway::WeatherProvider scripted_weather(std::vector<sensors::WeatherPoint> points) {
  return [points = std::move(points)](Timestamp t) -> std::optional<gateway::Weather> {
    if (points.empty()) return std::nullopt;
    auto current = points.front().weather;
    for (const auto& p : points) {
      if (p.ts > t) break;
      current = p.weather;
    }
    return current;
  };
}

std::vector<EpisodeReport> episode_reports(const std::vector<gateway::AlarmDispatched>& dispatched,
                                           const std::vector<emergency::DispatchRecord>& dispatches) {
  std::vector<EpisodeReport> out;
  for (const auto& d : dispatched) {
    EpisodeReport e;
    e.episode = d.episode;
    e.sensor_id = d.sensor_id;
    e.channel = d.channel ? std::string(protocol::to_string(*d.channel)) : std::string(protocol::kQuickSensorId);
    e.trigger_ts = d.trigger_ts;
    e.dispatched_at = d.ts;
    for (const auto& x : dispatches) {
      if (x.sensor_id == d.sensor_id && x.alarm_ts == d.ts) {
        e.dispatch_id = x.dispatch_id;
        e.received_at = x.received_at;
        e.latency_s = x.received_at - d.trigger_ts;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

SimHarness::SimHarness(sensors::Scenario scenario, HarnessOptions options)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      gateway_(scenario_.gateway,
               [this](Timestamp) -> std::optional<protocol::Location> {
                 if (fix_lost_) return std::nullopt;
                 return fix_;
               },
               scripted_weather(scenario_.weather)),
      server_(std::make_unique<server::Server>(server::build_directory(directory_seed_for(scenario_)))) {
  for (const auto name : sensors::kLinkNames) {
    const auto it = scenario_.links.find(std::string(name));
    links_.emplace(std::string(name), SimLink(std::string(name), it == scenario_.links.end() ? sensors::LinkSpec{}
                                                                                              : it->second));
  }
  server_->set_sms_sink([this](const std::string& elder, const std::string& line) {
    send("sms", [this, line] { handle(gateway_.handle_sms_line(line, clock_.now())); },
         json{{"to", elder}, {"line", line}});
  });
}

void SimHarness::log(json entry) {
  const auto line = entry.dump();
  digest_.update(line);
  digest_.update("\n");
  ++log_lines_;
  if (options_.log_sink) options_.log_sink(line);
}

void SimHarness::send(const std::string& name, std::function<void()> deliver, const json& what) {
  auto& link = links_.at(name);
  const auto plan = link.send(clock_.now());
  if (plan.copies == 0) {
    log(json{{"t", clock_.now()}, {"link", name}, {"op", "drop"}, {"index", plan.index}, {"msg", what}});
    return;
  }
  log(json{{"t", clock_.now()}, {"link", name}, {"op", "send"}, {"index", plan.index}, {"copies", plan.copies},
           {"msg", what}});
  for (int c = 0; c < plan.copies; ++c) {
    ++in_transit_;
    clock_.schedule(plan.deliver_at, [this, name, deliver, index = plan.index] {
      --in_transit_;
      links_.at(name).mark_delivered();
      log(json{{"t", clock_.now()}, {"link", name}, {"op", "deliver"}, {"index", index}});
      try {
        deliver();
      } catch (const RunError&) {
        throw;
      } catch (const std::exception& e) {
        throw RunError(clock_.now(), "delivery on " + name + " link: " + e.what());
      }
    });
  }
}

void SimHarness::handle(const gateway::Effects& effects) {
  const auto now = clock_.now();
  for (const auto& effect : effects) {
    log(json{{"t", now}, {"gateway", gateway::effect_to_json(effect)}});

    if (const auto* sms = std::get_if<gateway::SmsOut>(&effect)) {
      const auto target = sms->target;
      const auto line = sms->line;
      if (target == scenario_.emergency_target) {
        send("alarm", [this, line] {
          const auto r = centre_.receive_alarm(line, clock_.now());
          if (r.outcome == emergency::IntakeOutcome::Duplicate) ++duplicates_;
          json entry{{"t", clock_.now()}, {"emergency", to_string(r.outcome)}};
          if (r.dispatch) entry["dispatch_id"] = r.dispatch->dispatch_id;
          if (!r.reason.empty()) entry["reason"] = r.reason;
          log(std::move(entry));
        }, json{{"to", target}, {"line", line}});
      } else {
        send("family", [this, target, line] { family_inbox_.emplace_back(target, line); },
             json{{"to", target}, {"line", line}});
      }
    } else if (const auto* bulk = std::get_if<gateway::BulkOut>(&effect)) {
      const auto frame_id = bulk->frame.frame_id;
      auto bytes = protocol::frame_bulk(bulk->frame);
      awaiting_ack_.insert(frame_id);
      send("bulk", [this, bytes = std::move(bytes)] {
        const auto ack_bytes = server_->ingest_frame(bytes);
        const auto ack = protocol::unframe_ack(ack_bytes);
        log(json{{"t", clock_.now()}, {"server", "ack"}, {"frame_id", ack.frame_id}, {"accepted", ack.accepted}});
        send("ack", [this, ack] {
          awaiting_ack_.erase(ack.frame_id);
          handle(gateway_.on_ack(ack, clock_.now()));
        }, json{{"frame_id", ack.frame_id}, {"accepted", ack.accepted}});
      }, json{{"frame_id", frame_id}, {"items", bulk->frame.size()}});
      // No ack by the time a round trip would have completed: give up on the
      // frame; its items stay pending for the next flush.
      const auto timeout = now + links_.at("bulk").spec().latency_s + links_.at("ack").spec().latency_s + 1;
      clock_.schedule(timeout, [this, frame_id] {
        if (awaiting_ack_.erase(frame_id)) handle(gateway_.on_transport_failure(frame_id, clock_.now()));
      });
    } else if (const auto* d = std::get_if<gateway::AlarmDispatched>(&effect)) {
      dispatched_.push_back(*d);
    } else if (std::holds_alternative<gateway::AlarmCancelled>(effect)) {
      ++cancelled_;
    } else if (const auto* r = std::get_if<gateway::ReminderFired>(&effect)) {
      reminders_.push_back(ReminderReport{r->reminder.due, std::string(gateway::to_string(r->reminder.kind)),
                                          r->reminder.rule_id, r->reminder.text});
    } else if (std::holds_alternative<gateway::Warning>(effect)) {
      ++warnings_;
    }
  }
}

void SimHarness::apply(const sensors::ScenarioEvent& event) {
  const auto now = clock_.now();
  const auto& elder = scenario_.gateway.elder_id;
  log(json{{"t", now}, {"scenario_event", event.line}});
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, sensors::InjectSms>) {
          send("sms", [this, line = a.line] { handle(gateway_.handle_sms_line(line, clock_.now())); },
               json{{"to", elder}, {"line", a.line}});
        } else if constexpr (std::is_same_v<T, sensors::UserResponse>) {
          handle(gateway_.respond_to_alarm_prompt(a.channel, a.response, now));
        } else if constexpr (std::is_same_v<T, sensors::PressQuickAlarm>) {
          handle(gateway_.quick_alarm(now));
        } else if constexpr (std::is_same_v<T, sensors::DoctorThreshold>) {
          server_->set_threshold(a.doctor_id, elder, a.channel, a.low, a.high, now);
        } else if constexpr (std::is_same_v<T, sensors::DoctorAdvice>) {
          server_->send_advice(a.doctor_id, elder, a.text, now);
        } else if constexpr (std::is_same_v<T, sensors::SwitchMode>) {
          handle(gateway_.set_mode(a.mode, now));
        } else if constexpr (std::is_same_v<T, sensors::DropNext>) {
          links_.at(a.link).drop_next();
        } else if constexpr (std::is_same_v<T, sensors::MoveTo>) {
          fix_lost_ = !a.location.has_value();
          if (a.location) fix_ = a.location;
        }
      },
      event.action);
}

bool SimHarness::quiescent() const {
  if (in_transit_ > 0 || !awaiting_ack_.empty() || gateway_.store().pending_total() > 0) return false;
  for (const auto ch : protocol::kAllChannels) {
    if (const auto* m = gateway_.monitor(ch); m && m->state() == gateway::MonitorState::AlarmPending) return false;
  }
  return true;
}

void SimHarness::second(Timestamp t) {
  try {
    while (next_event_ < scenario_.events.size() && scenario_.events[next_event_].ts == t) {
      apply(scenario_.events[next_event_++]);
    }
    if (t <= scenario_.horizon_s) {
      for (const auto& spec : scenario_.sensors) {
        auto& seq = next_seq_[spec.sensor_id];
        if (auto rec = sensors::generate_sample(spec, scenario_.gateway.elder_id, t, seq + 1)) {
          ++seq;
          ++generated_;
          handle(gateway_.ingest_sample(*rec, t));
        }
      }
    }
    handle(gateway_.tick(t));
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(t, e.what());
  }

  const auto drain_limit =
      scenario_.horizon_s + options_.max_drain_s.value_or(50 * scenario_.gateway.bulk_interval_s);
  if (t >= scenario_.horizon_s && (quiescent() || t >= drain_limit)) {
    finished_ = true;
    return;
  }
  clock_.schedule(t + 1, [this, t] { second(t + 1); });
}

RunReport SimHarness::run() {
  if (ran_) throw Error("a harness runs once");
  ran_ = true;
  log(json{{"t", 0}, {"scenario", scenario_.name}, {"horizon", scenario_.horizon_s}});
  clock_.schedule(0, [this] { second(0); });
  while (!finished_ && clock_.next_ts()) clock_.step(*clock_.next_ts());
  // Deliveries still queued behind the final second.
  while (clock_.next_ts()) clock_.step(*clock_.next_ts());
  return build_report();
}

RunReport SimHarness::build_report() {
  RunReport r;
  r.scenario = scenario_.name;
  r.horizon_s = scenario_.horizon_s;
  r.end_ts = clock_.now();
  const auto& elder = scenario_.gateway.elder_id;

  r.episodes = episode_reports(dispatched_, centre_.list_dispatches(elder));
  r.cancelled = cancelled_;
  r.dispatches = centre_.dispatch_count();
  r.duplicate_alarms = duplicates_;
  r.family_messages = family_inbox_.size();
  for (const auto& [name, link] : links_) r.links[name] = link.counts();
  r.records_generated = generated_;
  r.records_synced = server_->record_count(elder);

  std::set<server::HealthRecordStore::RecordKey> local;
  for (const auto& rec : gateway_.store().history()) local.emplace(rec.sensor_id, rec.seq);
  r.stores_match = local == server_->record_keys(elder);

  for (const auto& m : reminders_) {
    (m.kind == "medicine" ? r.medicine_reminders : r.climate_reminders)++;
  }
  r.reminders = reminders_;
  r.warnings = warnings_;
  r.log_lines = log_lines_;
  r.digest = digest_.hex();
  return r;
}

RunReport run_scenario(const sensors::Scenario& scenario, HarnessOptions options) {
  SimHarness h(scenario, std::move(options));
  return h.run();
}

namespace {

std::vector<fs::path> scenario_dirs() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("ICARE_SCENARIO_DIR")) dirs.emplace_back(env);
#ifdef ICARE_SCENARIO_DIR
  dirs.emplace_back(ICARE_SCENARIO_DIR);
#endif
  return dirs;
}

}  // namespace

std::string find_scenario(const std::string& name) {
  if (fs::exists(name) && fs::is_regular_file(name)) return name;
  for (const auto& dir : scenario_dirs()) {
    for (const auto& candidate : {dir / name, dir / (name + ".scn")}) {
      if (fs::exists(candidate)) return candidate.string();
    }
  }
  throw NotFound("no shipped scenario named '" + name + "'");
}

std::vector<std::string> shipped_scenarios() {
  std::set<std::string> names;
  for (const auto& dir : scenario_dirs()) {
    if (!fs::is_directory(dir)) continue;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".scn") names.insert(entry.path().stem().string());
    }
  }
  return {names.begin(), names.end()};
}

}  // namespace icare::harness
