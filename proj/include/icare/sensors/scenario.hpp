// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario files drive the whole system in virtual time. Format (see
// scenarios/README.md for the full schema):
//
//   [scenario]              name, horizon, link_latency, emergency_target
//   [gateway]               gateway keys (same as a gateway config file)
//   [sensor <id>]           channel, period, generator = constant|ramp|script
//   [link <name>]           latency, drop, duplicate
//   [weather]               rows: <ts> <temp_c> [rain]   (step-hold)
//   [users]                 rows: <id> <role> <token> [display name...]
//   [assignments]           rows: <doctor> <subject>
//   [grants]                rows: <subject> <grantee>
//   [events]                rows: <ts> <action> [args...]

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icare/gateway/channel_monitor.hpp"
#include "icare/gateway/config.hpp"
#include "icare/gateway/reminders.hpp"
#include "icare/sensors/sensor.hpp"

namespace icare::sensors {

/// Simulated network links between components.
///   bulk   gateway -> server   bulk frames
///   ack    server -> gateway   ack frames
///   sms    server -> gateway   THRESH / ADVICE lines
///   alarm  gateway -> emergency centre
///   family gateway -> every other alarm target
inline constexpr std::array<std::string_view, 5> kLinkNames = {"bulk", "ack", "sms", "alarm", "family"};

struct LinkSpec {
  std::int64_t latency_s = 0;
  std::set<std::uint64_t> drop;       // zero-based message indices
  std::set<std::uint64_t> duplicate;  // delivered twice
};

/// An SMS line delivered to the gateway over the sms link.
struct InjectSms {
  std::string line;
};
struct UserResponse {
  protocol::VitalChannel channel = protocol::VitalChannel::EcgHr;
  gateway::AlarmResponse response = gateway::AlarmResponse::Cancel;
};
struct PressQuickAlarm {};
/// A doctor retuning a band through the server.
struct DoctorThreshold {
  std::string doctor_id;
  protocol::VitalChannel channel = protocol::VitalChannel::EcgHr;
  double low = 0.0;
  double high = 0.0;
};
struct DoctorAdvice {
  std::string doctor_id;
  std::string text;
};
struct SwitchMode {
  gateway::SystemMode mode = gateway::SystemMode::Monitoring;
};
/// Transport failure: the next message on the link is lost.
struct DropNext {
  std::string link;
};
/// New position fix, or loss of fix when empty.
struct MoveTo {
  std::optional<protocol::Location> location;
};

using ScenarioAction = std::variant<InjectSms, UserResponse, PressQuickAlarm, DoctorThreshold, DoctorAdvice,
                                    SwitchMode, DropNext, MoveTo>;

struct ScenarioEvent {
  Timestamp ts = 0;
  std::size_t line = 0;
  ScenarioAction action;
};

struct WeatherPoint {
  Timestamp ts = 0;
  std::optional<gateway::Weather> weather;  // empty = provider unavailable
};

struct UserSeed {
  std::string user_id;
  std::string role;
  std::string token;
  std::string display_name;
};

struct Scenario {
  std::string name;
  Timestamp horizon_s = 0;
  std::string emergency_target = "EC";
  gateway::GatewayConfig gateway;
  std::vector<SensorSpec> sensors;
  std::map<std::string, LinkSpec> links;  // every name in kLinkNames
  std::vector<WeatherPoint> weather;      // sorted by ts
  std::vector<UserSeed> users;
  std::vector<std::pair<std::string, std::string>> assignments;  // (doctor, subject)
  std::vector<std::pair<std::string, std::string>> grants;       // (subject, grantee)
  std::vector<ScenarioEvent> events;                             // sorted by ts, stable
};

/// Throws ParseError with the offending line for syntax and invariant errors.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

}  // namespace icare::sensors
