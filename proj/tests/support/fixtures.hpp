// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small builders shared by the test binaries.

#include <string>

#include "icare/gateway/config.hpp"
#include "icare/gateway/effects.hpp"
#include "icare/protocol/types.hpp"
#include "icare/server/config.hpp"

namespace icare::test {

inline protocol::VitalRecord rec(std::string sensor, protocol::VitalChannel ch, std::uint64_t seq,
                                 protocol::Timestamp ts, double value, std::string elder = "E01") {
  return protocol::VitalRecord{std::move(elder), std::move(sensor), ch, seq, ts, value};
}

inline protocol::VitalRecord hr(std::uint64_t seq, protocol::Timestamp ts, double value) {
  return rec("S-ECG-1", protocol::VitalChannel::EcgHr, seq, ts, value);
}

/// E01 monitoring ECG_HR in [50, 100], targets EC then F1.
inline gateway::GatewayConfig basic_config() {
  gateway::GatewayConfig cfg;
  cfg.elder_id = "E01";
  cfg.enabled_channels = {protocol::VitalChannel::EcgHr};
  cfg.alarm_wait_s = 30;
  cfg.bulk_interval_s = 300;
  cfg.alarm_targets = {"EC", "F1"};
  cfg.home_location = protocol::Location::from_degrees(38.88, 121.52);
  cfg.thresholds[protocol::VitalChannel::EcgHr] =
      protocol::Threshold{protocol::VitalChannel::EcgHr, 50, 100, "config", 0};
  return cfg;
}

/// E01/E02 elders, D01 assigned to E01, D02 unassigned, F01 granted by E01,
/// F02 not granted, specialists S01..S03. Token is "tok-<id>".
inline server::DirectorySeed ward_seed() {
  using server::Role;
  server::DirectorySeed seed;
  const std::pair<const char*, Role> users[] = {
      {"E01", Role::Elderly},      {"E02", Role::Elderly},      {"D01", Role::Doctor},
      {"D02", Role::Doctor},       {"F01", Role::FamilyFriend}, {"F02", Role::FamilyFriend},
      {"S01", Role::Specialist},   {"S02", Role::Specialist},   {"S03", Role::Specialist}};
  for (const auto& [id, role] : users) seed.users.push_back({id, role, id, std::string("tok-") + id});
  seed.assignments = {{"D01", "E01"}};
  seed.grants = {{"E01", "F01"}};
  return seed;
}

template <typename T>
std::size_t count_of(const gateway::Effects& effects) {
  return gateway::effects_of<T>(effects).size();
}

}  // namespace icare::test
