// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/channel_monitor.hpp"

namespace icare::gateway {

std::string_view to_string(MonitorState state) noexcept {
  switch (state) {
    case MonitorState::Normal: return "normal";
    case MonitorState::Flagged: return "flagged";
    case MonitorState::AlarmPending: return "alarm_pending";
    case MonitorState::Dispatched: return "dispatched";
  }
  return "?";
}

std::string_view to_string(AlarmResponse response) noexcept {
  return response == AlarmResponse::Cancel ? "cancel" : "confirm";
}

ChannelMonitor::Transition ChannelMonitor::set_threshold(protocol::Threshold threshold) {
  threshold_ = std::move(threshold);
  return reset();
}

ChannelMonitor::Transition ChannelMonitor::reset() {
  const Transition t{state_, MonitorState::Normal};
  state_ = MonitorState::Normal;
  pending_.reset();
  return t;
}

ChannelMonitor::Transition ChannelMonitor::observe(std::string_view sensor_id, double value,
                                                   Timestamp ts, Timestamp now,
                                                   std::int64_t alarm_wait_s) {
  last_value_ = value;
  last_ts_ = ts;
  Transition t{state_, state_};
  if (!threshold_) return t;

  const bool exceeds = threshold_->exceeded_by(value);
  switch (state_) {
    case MonitorState::Normal:
      if (exceeds) state_ = MonitorState::Flagged;
      break;
    case MonitorState::Flagged:
      if (exceeds) {
        state_ = MonitorState::AlarmPending;
        pending_ = PendingAlarm{now + alarm_wait_s, ts, std::string(sensor_id)};
      } else {
        state_ = MonitorState::Normal;
      }
      break;
    case MonitorState::AlarmPending:
      break;
    case MonitorState::Dispatched:
      if (!exceeds) state_ = MonitorState::Normal;
      break;
  }
  t.to = state_;
  return t;
}

std::optional<PendingAlarm> ChannelMonitor::expire(Timestamp now) {
  if (state_ != MonitorState::AlarmPending || !pending_ || pending_->deadline > now) {
    return std::nullopt;
  }
  state_ = MonitorState::Dispatched;
  auto episode = std::move(pending_);
  pending_.reset();
  return episode;
}

ChannelMonitor::ResponseOutcome ChannelMonitor::respond(AlarmResponse response, Timestamp now,
                                                        PendingAlarm* episode) {
  if (state_ != MonitorState::AlarmPending || !pending_ || now >= pending_->deadline) {
    return ResponseOutcome::Ignored;
  }
  if (episode != nullptr) *episode = *pending_;
  pending_.reset();
  if (response == AlarmResponse::Cancel) {
    state_ = MonitorState::Normal;
    return ResponseOutcome::Cancelled;
  }
  state_ = MonitorState::Dispatched;
  return ResponseOutcome::Confirmed;
}

}  // namespace icare::gateway
