// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gateway configuration: a flat key/value document.
//
//   elder_id          = E01
//   enabled_channels  = ECG_HR, SYS_BP
//   alarm_wait_s      = 30
//   bulk_interval_s   = 300
//   alarm_targets     = EC, F1        (emergency centre first)
//   system_mode       = monitoring    (or paused)
//   home_location     = 38.88000, 121.52000
//   threshold.ECG_HR  = 50, 100
//   medicine_period_h = 6             (6 | 8 | 12 | off)
//   medicine_anchor   = 0
//   climate_period_d  = 1             (1 | 2 | 3 | off)
//   climate_anchor    = 0

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icare/common/text_document.hpp"
#include "icare/gateway/reminders.hpp"
#include "icare/protocol/types.hpp"

namespace icare::gateway {

enum class SystemMode { Monitoring, Paused };

std::string_view to_string(SystemMode mode) noexcept;

struct GatewayConfig {
  std::string elder_id;
  std::set<protocol::VitalChannel> enabled_channels;
  std::int64_t alarm_wait_s = 30;
  std::int64_t bulk_interval_s = 300;
  std::vector<std::string> alarm_targets;
  SystemMode system_mode = SystemMode::Monitoring;
  protocol::Location home_location;
  std::map<protocol::VitalChannel, protocol::Threshold> thresholds;
  ReminderSchedule reminders;

  /// Throws ValidationError.
  void validate() const;
};

/// Reads the gateway keys from one section; unknown keys are rejected so typos
/// surface with their line number.
GatewayConfig gateway_config_from(const TextSection& section,
                                  const std::set<std::string, std::less<>>& extra_keys = {});
GatewayConfig load_gateway_config(const std::string& path);

}  // namespace icare::gateway
