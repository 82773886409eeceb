// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "icare/harness/sim_link.hpp"

namespace icare::harness {

struct EpisodeReport {
  std::uint64_t episode = 0;
  std::string sensor_id;
  std::string channel;          // "QUICK" for quick alarms
  Timestamp trigger_ts = 0;     // second exceedance sample, or the button press
  Timestamp dispatched_at = 0;  // gateway send time
  std::optional<std::string> dispatch_id;
  std::optional<Timestamp> received_at;  // emergency centre dispatch creation
  std::optional<std::int64_t> latency_s;
};

struct ReminderReport {
  Timestamp due = 0;
  std::string kind;
  std::string rule_id;  // climate only
  std::string text;
};

/// Everything here is derived from the run's event log.
struct RunReport {
  std::string scenario;
  Timestamp horizon_s = 0;
  Timestamp end_ts = 0;  // after the drain phase
  std::vector<EpisodeReport> episodes;
  std::uint64_t cancelled = 0;
  std::uint64_t dispatches = 0;
  std::uint64_t duplicate_alarms = 0;
  std::uint64_t family_messages = 0;
  std::map<std::string, LinkCounts> links;
  std::uint64_t records_generated = 0;
  std::uint64_t records_synced = 0;
  bool stores_match = false;  // server key set == gateway key set
  std::uint64_t medicine_reminders = 0;
  std::uint64_t climate_reminders = 0;
  std::vector<ReminderReport> reminders;
  std::uint64_t warnings = 0;
  std::uint64_t log_lines = 0;
  std::string digest;  // SHA-256 of the event log, hex
};

nlohmann::json report_to_json(const RunReport& r);
std::string report_summary(const RunReport& r);

/// Hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  /// Finalises; further updates are not allowed.
  std::string hex();

 private:
  void* ctx_;  // EVP_MD_CTX
};

}  // namespace icare::harness
