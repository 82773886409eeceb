// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "icare/protocol/bulk.hpp"
#include "icare/protocol/types.hpp"

namespace icare::server {

using protocol::Timestamp;

/// Alarm and advice history as seen by the server.
struct HistoryEvent {
  Timestamp ts = 0;
  std::string kind;    // gateway event kind, or "advice_sent" / "threshold_set"
  std::string detail;
  std::string source;  // "gateway" or the doctor's id
};

struct IngestResult {
  std::uint64_t processed = 0;  // what the ack reports, duplicates included
  std::vector<protocol::VitalRecord> inserted;
  std::vector<protocol::GatewayEventRecord> inserted_events;
  std::size_t duplicates = 0;
};

/// Per-subject vitals keyed by (sensor_id, seq), gateway events keyed by
/// event seq, and the doctor-set thresholds. Re-ingesting a key is a no-op.
/// Not synchronised; the Server guards it.
class HealthRecordStore {
 public:
  using RecordKey = std::tuple<std::string, std::uint64_t>;

  /// The frame must already be validated; every record goes to frame.elder_id.
  IngestResult ingest(const protocol::BulkFrame& frame);

  /// Records with ts >= since, ordered by (ts, sensor_id, seq).
  std::vector<protocol::VitalRecord> records(std::string_view subject, Timestamp since) const;
  std::size_t record_count(std::string_view subject) const;
  std::set<RecordKey> record_keys(std::string_view subject) const;

  void set_threshold(const std::string& subject, const protocol::Threshold& threshold);
  std::map<protocol::VitalChannel, protocol::Threshold> thresholds(std::string_view subject) const;

  void append_history(const std::string& subject, HistoryEvent event);
  std::vector<HistoryEvent> history(std::string_view subject) const;
  /// Alarm-related history, newest first.
  std::vector<HistoryEvent> alarms(std::string_view subject) const;

 private:
  struct SubjectData {
    std::map<RecordKey, protocol::VitalRecord> records;
    std::set<std::uint64_t> event_seqs;
    std::vector<HistoryEvent> history;
    std::map<protocol::VitalChannel, protocol::Threshold> thresholds;
  };

  const SubjectData* find(std::string_view subject) const;

  std::map<std::string, SubjectData, std::less<>> subjects_;
};

}  // namespace icare::server
