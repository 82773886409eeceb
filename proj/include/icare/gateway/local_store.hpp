// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icare/protocol/bulk.hpp"
#include "icare/protocol/types.hpp"

namespace icare::gateway {

using protocol::Timestamp;

/// (sensor_id, seq); the elder is fixed per gateway.
using RecordKey = std::pair<std::string, std::uint64_t>;

struct AlarmEntry {
  Timestamp ts = 0;
  std::string sensor_id;
  std::optional<protocol::VitalChannel> channel;  // empty for quick alarms
  protocol::Location location;
  std::uint64_t episode = 0;
};

struct AdviceEntry {
  Timestamp ts = 0;           // doctor's send time
  Timestamp received_at = 0;
  std::string doctor_id;
  std::string text;
};

/// The phone's record store. Every accepted sample lands in the history and in
/// the pending upload log; the pending log only drains on a server ack.
class LocalStore {
 public:
  /// False when seq does not increase on the (sensor_id) stream.
  bool append(const protocol::VitalRecord& rec);

  void log_event(protocol::GatewayEventKind kind, Timestamp ts, std::string detail);
  void record_alarm(AlarmEntry entry) { alarms_.push_back(std::move(entry)); }
  void record_advice(AdviceEntry entry) { advice_.push_back(std::move(entry)); }

  /// Snapshot of everything pending, records in (sensor_id, seq) order.
  protocol::BulkFrame pending_frame(std::uint64_t frame_id, const std::string& elder_id) const;

  /// Drops the first `count` items of `frame` (records first, then events)
  /// from the pending log and advances per-stream watermarks. Returns the
  /// number of items that were still pending.
  std::size_t drain(const protocol::BulkFrame& frame, std::size_t count);

  std::size_t pending_records() const noexcept { return pending_.size(); }
  std::size_t pending_events() const noexcept { return pending_events_.size(); }
  std::size_t pending_total() const noexcept { return pending_.size() + pending_events_.size(); }

  const std::vector<protocol::VitalRecord>& history() const noexcept { return history_; }
  const std::vector<AlarmEntry>& alarms() const noexcept { return alarms_; }
  const std::vector<AdviceEntry>& advice() const noexcept { return advice_; }
  const std::map<protocol::VitalChannel, protocol::VitalRecord>& latest() const noexcept { return latest_; }
  std::optional<std::uint64_t> watermark(const std::string& sensor_id) const;

 private:
  std::vector<protocol::VitalRecord> history_;
  std::map<RecordKey, protocol::VitalRecord> pending_;
  std::map<std::uint64_t, protocol::GatewayEventRecord> pending_events_;
  std::map<std::string, std::uint64_t> last_seq_;
  std::map<std::string, std::uint64_t> acked_;
  std::map<protocol::VitalChannel, protocol::VitalRecord> latest_;
  std::vector<AlarmEntry> alarms_;
  std::vector<AdviceEntry> advice_;
  std::uint64_t next_event_seq_ = 1;
};

}  // namespace icare::gateway
