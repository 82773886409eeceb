// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icare/protocol/types.hpp"

namespace icare::gateway {

using protocol::Timestamp;

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Medicine reminders run every 6, 8 or 12 hours; climate reminders every
/// 1, 2 or 3 days. Anything else is rejected by validate().
struct ReminderSchedule {
  std::optional<int> medicine_period_h;
  std::optional<int> climate_period_d;
  Timestamp medicine_anchor = 0;
  Timestamp climate_anchor = 0;

  void validate() const;
  bool empty() const noexcept { return !medicine_period_h && !climate_period_d; }
};

struct Weather {
  double temp_c = 20.0;
  bool rain = false;

  friend bool operator==(const Weather&, const Weather&) = default;
};

using WeatherProvider = std::function<std::optional<Weather>(Timestamp)>;

struct ClimateRule {
  std::string_view id;
  std::string_view advice;
  bool (*matches)(const Weather&);
};

/// Shipped climate-advice table, evaluated first-match in order. The last
/// rule matches everything so exactly one rule fires per reading.
std::span<const ClimateRule> climate_rules() noexcept;
const ClimateRule& match_climate_rule(const Weather& weather) noexcept;

inline constexpr std::string_view kWeatherUnavailable = "weather unavailable";

enum class ReminderKind { Medicine, Climate };

std::string_view to_string(ReminderKind kind) noexcept;

struct Reminder {
  ReminderKind kind = ReminderKind::Medicine;
  Timestamp due = 0;
  std::string text;
  std::optional<Weather> weather;
  std::string rule_id;  // climate only; empty when the weather was unavailable
};

/// Tracks how many firings of each reminder have been emitted. Firings happen
/// at anchor + k*period for k >= 1; a late call catches up on every missed one.
class ReminderScheduler {
 public:
  ReminderScheduler() = default;
  explicit ReminderScheduler(ReminderSchedule schedule);

  /// Every firing due at or before `now` that has not been emitted yet,
  /// ordered by due time (medicine first on ties).
  std::vector<Reminder> due(Timestamp now, const WeatherProvider& weather);

  const ReminderSchedule& schedule() const noexcept { return schedule_; }
  std::int64_t medicine_fired() const noexcept { return medicine_fired_; }
  std::int64_t climate_fired() const noexcept { return climate_fired_; }

 private:
  ReminderSchedule schedule_;
  std::int64_t medicine_fired_ = 0;
  std::int64_t climate_fired_ = 0;
};

}  // namespace icare::gateway
