// SPDX-License-Identifier: Apache-2.0
#include "icare/sensors/sensor.hpp"

#include <algorithm>
#include <cmath>

#include "icare/common/errors.hpp"

namespace icare::sensors {

void SensorSpec::validate() const {
  if (!protocol::is_valid_id(sensor_id)) throw ValidationError("invalid sensor id '" + sensor_id + "'");
  if (sensor_id == protocol::kQuickSensorId) throw ValidationError("sensor id QUICK is reserved");
  if (period_s < 1) throw ValidationError("period must be >= 1");
  if (const auto* s = std::get_if<ScriptWave>(&generator)) {
    if (s->points.empty()) throw ValidationError("script needs at least one point");
    for (std::size_t i = 1; i < s->points.size(); ++i) {
      if (s->points[i].first <= s->points[i - 1].first) {
        throw ValidationError("script timestamps must be strictly increasing");
      }
    }
  }
}

double waveform_value(const Waveform& wave, Timestamp t) {
  if (const auto* c = std::get_if<ConstantWave>(&wave)) return c->value;
  if (const auto* r = std::get_if<RampWave>(&wave)) return r->start + r->slope * static_cast<double>(t);
  const auto& points = std::get<ScriptWave>(wave).points;
  if (points.empty()) return 0.0;
  const auto it = std::upper_bound(points.begin(), points.end(), t,
                                   [](Timestamp v, const auto& p) { return v < p.first; });
  return it == points.begin() ? points.front().second : std::prev(it)->second;
}

std::optional<protocol::VitalRecord> generate_sample(const SensorSpec& spec, const std::string& elder_id,
                                                     Timestamp t, std::uint64_t seq) {
  if (t < 0 || spec.period_s < 1 || t % spec.period_s != 0) return std::nullopt;
  return protocol::VitalRecord{elder_id, spec.sensor_id, spec.channel, seq, t, waveform_value(spec.generator, t)};
}

std::vector<protocol::VitalRecord> generate_stream(const SensorSpec& spec, const std::string& elder_id,
                                                   Timestamp horizon) {
  std::vector<protocol::VitalRecord> out;
  std::uint64_t seq = 1;
  for (Timestamp t = 0; t <= horizon; t += spec.period_s) {
    if (auto rec = generate_sample(spec, elder_id, t, seq)) {
      out.push_back(std::move(*rec));
      ++seq;
    }
  }
  return out;
}

}  // namespace icare::sensors
