// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "icare/protocol/types.hpp"

namespace icare::gateway {

using protocol::Timestamp;
using protocol::VitalChannel;

enum class MonitorState { Normal, Flagged, AlarmPending, Dispatched };

std::string_view to_string(MonitorState state) noexcept;

enum class AlarmResponse { Cancel, Confirm };

std::string_view to_string(AlarmResponse response) noexcept;

/// The open cancel window of an alarm episode.
struct PendingAlarm {
  Timestamp deadline = 0;
  Timestamp trigger_ts = 0;  // ts of the second consecutive exceedance
  std::string sensor_id;
};

/// Per-channel alarm state machine.
///
///   Normal --exceed--> Flagged --exceed--> AlarmPending --deadline/confirm--> Dispatched
///     ^                  |                      |                                |
///     +----in range------+------cancel----------+-----------in range-------------+
///
/// AlarmPending ignores further samples; Dispatched stays put on exceedances
/// so one excursion produces one alarm.
class ChannelMonitor {
 public:
  struct Transition {
    MonitorState from = MonitorState::Normal;
    MonitorState to = MonitorState::Normal;
    bool changed() const noexcept { return from != to; }
  };

  enum class ResponseOutcome { Cancelled, Confirmed, Ignored };

  explicit ChannelMonitor(VitalChannel channel) : channel_(channel) {}

  VitalChannel channel() const noexcept { return channel_; }
  MonitorState state() const noexcept { return state_; }
  const std::optional<protocol::Threshold>& threshold() const noexcept { return threshold_; }
  const std::optional<PendingAlarm>& pending() const noexcept { return pending_; }
  std::optional<double> last_value() const noexcept { return last_value_; }
  std::optional<Timestamp> last_ts() const noexcept { return last_ts_; }

  /// Replaces the band and returns to Normal, discarding any open episode.
  Transition set_threshold(protocol::Threshold threshold);

  /// Without a threshold the sample is recorded but never flags.
  Transition observe(std::string_view sensor_id, double value, Timestamp ts, Timestamp now,
                     std::int64_t alarm_wait_s);

  /// AlarmPending -> Dispatched once the deadline has been reached. Returns the
  /// episode that expired, if any.
  std::optional<PendingAlarm> expire(Timestamp now);

  /// Only honoured while AlarmPending and strictly before the deadline.
  ResponseOutcome respond(AlarmResponse response, Timestamp now, PendingAlarm* episode = nullptr);

  Transition reset();

 private:
  VitalChannel channel_;
  MonitorState state_ = MonitorState::Normal;
  std::optional<protocol::Threshold> threshold_;
  std::optional<PendingAlarm> pending_;
  std::optional<double> last_value_;
  std::optional<Timestamp> last_ts_;
};

}  // namespace icare::gateway
