// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace icare::protocol {

/// Integer Unix seconds. Virtual in simulation, wall-clock in live mode.
using Timestamp = std::int64_t;

enum class VitalChannel : std::uint8_t {
  EcgHr,     // beats/min, derived from the ECG
  SysBp,     // mmHg
  DiaBp,     // mmHg
  Activity,  // counts/min from the accelerometer
};

inline constexpr std::array<VitalChannel, 4> kAllChannels = {
    VitalChannel::EcgHr, VitalChannel::SysBp, VitalChannel::DiaBp, VitalChannel::Activity};

std::string_view to_string(VitalChannel channel) noexcept;
std::optional<VitalChannel> parse_channel(std::string_view name) noexcept;

/// Quick alarms have no physical sensor behind them.
inline constexpr std::string_view kQuickSensorId = "QUICK";

/// A position stored at the wire precision of five decimals, so equality is
/// exact and survives any number of encode/decode cycles.
class Location {
 public:
  static constexpr std::int64_t kScale = 100000;

  constexpr Location() = default;

  /// Rounds to five decimals. Throws ValidationError outside [-90,90] x [-180,180].
  static Location from_degrees(double lat, double lon);
  static Location from_scaled(std::int64_t lat_e5, std::int64_t lon_e5);

  double lat() const noexcept { return static_cast<double>(lat_e5_) / kScale; }
  double lon() const noexcept { return static_cast<double>(lon_e5_) / kScale; }
  std::int64_t lat_e5() const noexcept { return lat_e5_; }
  std::int64_t lon_e5() const noexcept { return lon_e5_; }

  /// "38.88000,121.52000"
  std::string to_wire() const;
  /// Inverse of to_wire; requires exactly five decimals on each coordinate.
  static std::optional<Location> parse_wire(std::string_view text);

  friend bool operator==(const Location&, const Location&) = default;

 private:
  constexpr Location(std::int64_t lat_e5, std::int64_t lon_e5) : lat_e5_(lat_e5), lon_e5_(lon_e5) {}

  std::int64_t lat_e5_ = 0;
  std::int64_t lon_e5_ = 0;
};

/// One timestamped reading. (elder_id, sensor_id, seq) identifies it globally.
struct VitalRecord {
  std::string elder_id;
  std::string sensor_id;
  VitalChannel channel = VitalChannel::EcgHr;
  std::uint64_t seq = 0;
  Timestamp ts = 0;
  double value = 0.0;

  friend bool operator==(const VitalRecord&, const VitalRecord&) = default;
};

/// Inclusive band; a value outside [low, high] is an exceedance.
struct Threshold {
  VitalChannel channel = VitalChannel::EcgHr;
  double low = 0.0;
  double high = 0.0;
  std::string set_by;
  Timestamp ts = 0;

  bool exceeded_by(double value) const noexcept { return value < low || value > high; }

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Throws ValidationError unless low <= high and both are finite.
void validate_band(double low, double high);

/// Identifiers travel inside pipe/comma delimited lines: non-empty printable
/// ASCII without '|' or ','.
bool is_valid_id(std::string_view id) noexcept;

}  // namespace icare::protocol
