// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "icare/net/http_types.hpp"
#include "icare/protocol/types.hpp"

namespace icare::emergency {

using protocol::Timestamp;

/// A recorded ambulance dispatch. The ambulance itself is outside the system.
struct DispatchRecord {
  std::string dispatch_id;  // "X<n>" in intake order
  Timestamp alarm_ts = 0;
  std::string elder_id;
  std::string sensor_id;
  protocol::Location location;
  std::string location_text;  // the line's field verbatim
  Timestamp received_at = 0;
  std::string status = "dispatched";
};

enum class IntakeOutcome { Dispatched, Duplicate, Rejected };

std::string_view to_string(IntakeOutcome o) noexcept;

struct IntakeResult {
  IntakeOutcome outcome = IntakeOutcome::Rejected;
  std::optional<DispatchRecord> dispatch;  // the new or the already-existing one
  std::string reason;                      // set when rejected
};

nlohmann::json dispatch_to_json(const DispatchRecord& d);

/// Receives ALARM lines and dispatches once per (elder, sensor, alarm ts).
/// Thread-safe; the dedup check and insert happen under one lock.
class EmergencyCentre {
 public:
  /// When set, audit entries are also appended to this file, one JSON per line.
  explicit EmergencyCentre(std::optional<std::filesystem::path> audit_path = {});

  IntakeResult receive_alarm(std::string_view line, Timestamp now);

  /// Newest first; filtered to one elder when given.
  std::vector<DispatchRecord> list_dispatches(const std::optional<std::string>& elder_id = {}) const;
  std::size_t dispatch_count() const;
  std::vector<std::string> audit_log() const;

  /// GET /dispatches?elder_id=
  net::HttpResponse handle_http(const net::HttpRequest& req) const;

 private:
  using Key = std::tuple<std::string, std::string, Timestamp>;

  void audit(const nlohmann::json& entry);

  mutable std::mutex mutex_;
  std::map<Key, std::size_t> index_;  // -> position in dispatches_
  std::vector<DispatchRecord> dispatches_;
  std::vector<std::string> audit_;
  std::optional<std::ofstream> audit_file_;
};

}  // namespace icare::emergency
