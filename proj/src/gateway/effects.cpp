// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/effects.hpp"

#include "icare/protocol/json.hpp"

namespace icare::gateway {

using nlohmann::json;

namespace {

struct ToJson {
  json operator()(const SampleStored& e) const {
    return {{"type", "sample_stored"}, {"record", protocol::record_to_json(e.record)},
            {"monitored", e.monitored}};
  }
  json operator()(const SampleRejected& e) const {
    return {{"type", "sample_rejected"}, {"record", protocol::record_to_json(e.record)},
            {"reason", e.reason}};
  }
  json operator()(const StateChanged& e) const {
    return {{"type", "state_changed"}, {"channel", protocol::to_string(e.channel)},
            {"from", to_string(e.from)}, {"to", to_string(e.to)}};
  }
  json operator()(const AlarmPrompt& e) const {
    return {{"type", "alarm_prompt"}, {"channel", protocol::to_string(e.channel)},
            {"episode", e.episode}, {"trigger_ts", e.trigger_ts}, {"deadline", e.deadline}};
  }
  json operator()(const SmsOut& e) const {
    return {{"type", "sms_out"}, {"target", e.target}, {"line", e.line}};
  }
  json operator()(const AlarmDispatched& e) const {
    json j{{"type", "alarm_dispatched"}, {"episode", e.episode}, {"sensor_id", e.sensor_id},
           {"ts", e.ts}, {"trigger_ts", e.trigger_ts}, {"targets", e.targets}};
    j["channel"] = e.channel ? json(protocol::to_string(*e.channel)) : json(nullptr);
    return j;
  }
  json operator()(const AlarmCancelled& e) const {
    return {{"type", "alarm_cancelled"}, {"episode", e.episode},
            {"channel", protocol::to_string(e.channel)}, {"ts", e.ts}};
  }
  json operator()(const Notification& e) const {
    return {{"type", "notification"}, {"topic", e.topic}, {"text", e.text}};
  }
  json operator()(const ReminderFired& e) const {
    json j{{"type", "reminder"}, {"kind", to_string(e.reminder.kind)}, {"due", e.reminder.due},
           {"text", e.reminder.text}, {"rule", e.reminder.rule_id}};
    return j;
  }
  json operator()(const BulkOut& e) const {
    return {{"type", "bulk_out"}, {"frame", e.frame.frame_id}, {"records", e.frame.records.size()},
            {"events", e.frame.events.size()}};
  }
  json operator()(const BulkSynced& e) const {
    return {{"type", "bulk_synced"}, {"frame", e.frame_id}, {"acked", e.acked}, {"drained", e.drained}};
  }
  json operator()(const SyncFailed& e) const {
    return {{"type", "sync_failed"}, {"frame", e.frame_id}, {"retained", e.retained}};
  }
  json operator()(const Warning& e) const { return {{"type", "warning"}, {"text", e.text}}; }
};

}  // namespace

json effect_to_json(const Effect& effect) { return std::visit(ToJson{}, effect); }

}  // namespace icare::gateway
