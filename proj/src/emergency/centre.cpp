// SPDX-License-Identifier: Apache-2.0
#include "icare/emergency/centre.hpp"

#include <algorithm>

#include "icare/common/errors.hpp"
#include "icare/protocol/sms.hpp"

namespace icare::emergency {

using json = nlohmann::json;

std::string_view to_string(IntakeOutcome o) noexcept {
  switch (o) {
    case IntakeOutcome::Dispatched: return "dispatched";
    case IntakeOutcome::Duplicate: return "duplicate";
    case IntakeOutcome::Rejected: return "rejected";
  }
  return "rejected";
}

json dispatch_to_json(const DispatchRecord& d) {
  return json{{"dispatch_id", d.dispatch_id}, {"alarm_ts", d.alarm_ts},   {"elder_id", d.elder_id},
              {"sensor_id", d.sensor_id},     {"location", d.location_text}, {"received_at", d.received_at},
              {"status", d.status}};
}

EmergencyCentre::EmergencyCentre(std::optional<std::filesystem::path> audit_path) {
  if (audit_path) {
    audit_file_.emplace(*audit_path, std::ios::app);
    if (!*audit_file_) throw Error("cannot open audit log " + audit_path->string());
  }
}

void EmergencyCentre::audit(const json& entry) {
  audit_.push_back(entry.dump());
  if (audit_file_) *audit_file_ << audit_.back() << '\n' << std::flush;
}

IntakeResult EmergencyCentre::receive_alarm(std::string_view line, Timestamp now) {
  std::lock_guard lock(mutex_);
  IntakeResult result;
  protocol::AlarmSms alarm;
  try {
    auto msg = protocol::decode_sms(line);
    const auto* a = std::get_if<protocol::AlarmSms>(&msg);
    if (!a) throw ProtocolError("not an ALARM message");
    alarm = *a;
  } catch (const ProtocolError& e) {
    result.reason = e.what();
    audit(json{{"event", "rejected"}, {"at", now}, {"line", std::string(line)}, {"reason", result.reason}});
    return result;
  }

  Key key{alarm.elder_id, alarm.sensor_id, alarm.ts};
  if (const auto it = index_.find(key); it != index_.end()) {
    result.outcome = IntakeOutcome::Duplicate;
    result.dispatch = dispatches_[it->second];
    audit(json{{"event", "duplicate"}, {"at", now}, {"dispatch_id", result.dispatch->dispatch_id}});
    return result;
  }

  // Keep the coordinates exactly as they arrived.
  auto text = std::string(line);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  DispatchRecord d;
  d.dispatch_id = "X" + std::to_string(dispatches_.size() + 1);
  d.alarm_ts = alarm.ts;
  d.elder_id = alarm.elder_id;
  d.sensor_id = alarm.sensor_id;
  d.location = alarm.location;
  d.location_text = text.substr(text.rfind('|') + 1);
  d.received_at = now;
  index_.emplace(std::move(key), dispatches_.size());
  dispatches_.push_back(d);
  audit(json{{"event", "dispatched"}, {"at", now}, {"dispatch", dispatch_to_json(d)}});
  result.outcome = IntakeOutcome::Dispatched;
  result.dispatch = std::move(d);
  return result;
}

std::vector<DispatchRecord> EmergencyCentre::list_dispatches(const std::optional<std::string>& elder_id) const {
  std::lock_guard lock(mutex_);
  std::vector<DispatchRecord> out;
  // Intake order is received_at order, so reverse iteration is newest first.
  for (auto it = dispatches_.rbegin(); it != dispatches_.rend(); ++it) {
    if (!elder_id || it->elder_id == *elder_id) out.push_back(*it);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DispatchRecord& a, const DispatchRecord& b) { return a.received_at > b.received_at; });
  return out;
}

std::size_t EmergencyCentre::dispatch_count() const {
  std::lock_guard lock(mutex_);
  return dispatches_.size();
}

std::vector<std::string> EmergencyCentre::audit_log() const {
  std::lock_guard lock(mutex_);
  return audit_;
}

net::HttpResponse EmergencyCentre::handle_http(const net::HttpRequest& req) const {
  if (req.path != "/dispatches") return {404, json{{"error", "no route for " + req.path}}.dump()};
  if (req.method != "GET") return {405, json{{"error", req.method + " not allowed"}}.dump()};
  std::optional<std::string> elder;
  if (auto e = req.query_or("elder_id"); !e.empty()) elder = std::move(e);
  json out = json::array();
  for (const auto& d : list_dispatches(elder)) out.push_back(dispatch_to_json(d));
  return {200, json{{"dispatches", out}}.dump()};
}

}  // namespace icare::emergency
