// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "icare/protocol/types.hpp"

namespace icare::sensors {

using protocol::Timestamp;

struct ConstantWave {
  double value = 0.0;
};

/// value(t) = start + slope * t
struct RampWave {
  double start = 0.0;
  double slope = 0.0;
};

/// Step-hold through (ts, value) points; before the first point the first
/// value holds, after the last point the last value holds.
struct ScriptWave {
  std::vector<std::pair<Timestamp, double>> points;
};

using Waveform = std::variant<ConstantWave, RampWave, ScriptWave>;

struct SensorSpec {
  std::string sensor_id;
  protocol::VitalChannel channel = protocol::VitalChannel::EcgHr;
  std::int64_t period_s = 1;
  Waveform generator = ConstantWave{};

  /// Throws ValidationError: period_s >= 1, script non-empty with strictly
  /// increasing timestamps, valid id.
  void validate() const;
};

double waveform_value(const Waveform& wave, Timestamp t);

/// A record iff t is a multiple of period_s. Pure in (spec, t, seq).
std::optional<protocol::VitalRecord> generate_sample(const SensorSpec& spec, const std::string& elder_id,
                                                     Timestamp t, std::uint64_t seq);

/// Every sample of `spec` on [0, horizon] with gapless seq starting at 1.
std::vector<protocol::VitalRecord> generate_stream(const SensorSpec& spec, const std::string& elder_id,
                                                   Timestamp horizon);

}  // namespace icare::sensors
