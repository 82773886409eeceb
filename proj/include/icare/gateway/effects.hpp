// SPDX-License-Identifier: Apache-2.0
#pragma once

// Everything the gateway does is reported as an effect. The runtime shell turns
// SmsOut and BulkOut into transport sends; the rest goes to the effect log.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "icare/gateway/channel_monitor.hpp"
#include "icare/gateway/reminders.hpp"
#include "icare/protocol/bulk.hpp"
#include "icare/protocol/types.hpp"

namespace icare::gateway {

struct SampleStored {
  protocol::VitalRecord record;
  bool monitored = false;
};

struct SampleRejected {
  protocol::VitalRecord record;
  std::string reason;
};

struct StateChanged {
  VitalChannel channel = VitalChannel::EcgHr;
  MonitorState from = MonitorState::Normal;
  MonitorState to = MonitorState::Normal;
};

/// Asks the elder whether the alarm is real.
struct AlarmPrompt {
  VitalChannel channel = VitalChannel::EcgHr;
  std::uint64_t episode = 0;
  Timestamp trigger_ts = 0;
  Timestamp deadline = 0;
};

struct SmsOut {
  std::string target;
  std::string line;  // LF-terminated
};

struct AlarmDispatched {
  std::uint64_t episode = 0;
  std::string sensor_id;
  std::optional<VitalChannel> channel;  // empty for quick alarms
  Timestamp ts = 0;
  Timestamp trigger_ts = 0;
  std::size_t targets = 0;
};

struct AlarmCancelled {
  std::uint64_t episode = 0;
  VitalChannel channel = VitalChannel::EcgHr;
  Timestamp ts = 0;
};

/// A screen notification for the elder (new threshold, new advice).
struct Notification {
  std::string topic;
  std::string text;
};

struct ReminderFired {
  Reminder reminder;
};

struct BulkOut {
  protocol::BulkFrame frame;
};

struct BulkSynced {
  std::uint64_t frame_id = 0;
  std::uint64_t acked = 0;
  std::uint64_t drained = 0;
};

struct SyncFailed {
  std::uint64_t frame_id = 0;
  std::size_t retained = 0;
};

struct Warning {
  std::string text;
};

using Effect = std::variant<SampleStored, SampleRejected, StateChanged, AlarmPrompt, SmsOut,
                            AlarmDispatched, AlarmCancelled, Notification, ReminderFired, BulkOut,
                            BulkSynced, SyncFailed, Warning>;

using Effects = std::vector<Effect>;

/// Stable JSON rendering; keys are sorted so the log is byte-reproducible.
nlohmann::json effect_to_json(const Effect& effect);

template <typename T>
std::vector<const T*> effects_of(const Effects& effects) {
  std::vector<const T*> out;
  for (const auto& e : effects) {
    if (const auto* p = std::get_if<T>(&e)) out.push_back(p);
  }
  return out;
}

}  // namespace icare::gateway
