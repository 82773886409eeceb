// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <variant>
#include <vector>

#include "icare/gateway/channel_monitor.hpp"
#include "icare/gateway/config.hpp"
#include "icare/gateway/effects.hpp"
#include "icare/gateway/local_store.hpp"
#include "icare/gateway/position.hpp"
#include "icare/gateway/reminders.hpp"
#include "icare/protocol/bulk.hpp"
#include "icare/protocol/sms.hpp"

namespace icare::gateway {

enum class LocalQuery { Alarms, Advice, LatestVitals };

using LocalQueryResult =
    std::variant<std::vector<AlarmEntry>, std::vector<AdviceEntry>, std::vector<protocol::VitalRecord>>;

/// The phone. A deterministic state machine driven by one event at a time;
/// the same config and event sequence always yield the same effects.
/// Not thread-safe: callers serialise events (see GatewayLoop).
class Gateway {
 public:
  /// Positions start from config.home_location; the provider supplies live fixes.
  explicit Gateway(GatewayConfig config, PositionProvider position = {}, WeatherProvider weather = {});

  Effects ingest_sample(const protocol::VitalRecord& rec, Timestamp now);
  Effects tick(Timestamp now);
  Effects respond_to_alarm_prompt(VitalChannel channel, AlarmResponse response, Timestamp now);
  Effects quick_alarm(Timestamp now);
  Effects handle_inbound(const protocol::SmsMessage& msg, Timestamp now);
  /// Decodes and classifies a raw SMS line; undecodable lines become warnings.
  Effects handle_sms_line(std::string_view line, Timestamp now);

  /// Snapshot of the pending log as a new frame. The frame is remembered as in
  /// flight until acked or failed; nothing drains here.
  protocol::BulkFrame flush_bulk(Timestamp now);
  Effects on_ack(const protocol::BulkAck& ack, Timestamp now);
  Effects on_transport_failure(std::uint64_t frame_id, Timestamp now);

  Effects set_mode(SystemMode mode, Timestamp now);

  /// Due reminders, advancing the scheduler. Empty while paused.
  std::vector<Reminder> due_reminders(Timestamp now);

  /// Newest first.
  LocalQueryResult query_local(LocalQuery kind) const;

  const GatewayConfig& config() const noexcept { return config_; }
  const LocalStore& store() const noexcept { return store_; }
  const ChannelMonitor* monitor(VitalChannel channel) const;
  SystemMode mode() const noexcept { return mode_; }
  std::size_t in_flight() const noexcept { return in_flight_.size(); }

 private:
  Effects dispatch_alarm(const std::string& sensor_id, std::optional<VitalChannel> channel,
                         std::uint64_t episode, Timestamp trigger_ts, Timestamp now);
  void push_transition(Effects& out, VitalChannel channel, const ChannelMonitor::Transition& t);

  GatewayConfig config_;
  PositionSource position_;
  WeatherProvider weather_;
  ReminderScheduler reminders_;
  LocalStore store_;
  std::map<VitalChannel, ChannelMonitor> monitors_;
  std::map<VitalChannel, protocol::Threshold> inert_thresholds_;
  std::map<VitalChannel, std::uint64_t> open_episode_;
  std::map<std::uint64_t, protocol::BulkFrame> in_flight_;
  SystemMode mode_;
  Timestamp last_flush_ = 0;
  std::uint64_t next_frame_id_ = 1;
  std::uint64_t next_episode_ = 1;
};

}  // namespace icare::gateway
