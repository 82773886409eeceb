// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/reminders.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "icare/common/errors.hpp"

namespace icare::gateway {

namespace {

constexpr std::array<ClimateRule, 5> kClimateRules = {{
    {"severe_cold", "Severe cold today. Stay indoors, keep warm and avoid icy paths.",
     [](const Weather& w) { return w.temp_c <= 0.0; }},
    {"cold", "It is cold today. Wear warm clothes if you go out.",
     [](const Weather& w) { return w.temp_c > 0.0 && w.temp_c <= 10.0; }},
    {"heat", "It is hot today. Drink plenty of water and avoid the midday sun.",
     [](const Weather& w) { return w.temp_c >= 30.0; }},
    {"rain", "Rain is expected. Take an umbrella and watch for slippery floors.",
     [](const Weather& w) { return w.rain; }},
    {"fair", "The weather is mild today. A short walk outside is a good idea.",
     [](const Weather&) { return true; }},
}};

std::int64_t firings_through(Timestamp now, Timestamp anchor, std::int64_t period) {
  if (now < anchor + period) return 0;
  return (now - anchor) / period;
}

std::string describe(const Weather& w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f C%s", w.temp_c, w.rain ? ", rain" : "");
  return buf;
}

}  // namespace

void ReminderSchedule::validate() const {
  if (medicine_period_h && *medicine_period_h != 6 && *medicine_period_h != 8 &&
      *medicine_period_h != 12) {
    throw ValidationError("medicine period must be 6, 8 or 12 hours");
  }
  if (climate_period_d && (*climate_period_d < 1 || *climate_period_d > 3)) {
    throw ValidationError("climate period must be 1, 2 or 3 days");
  }
}

std::span<const ClimateRule> climate_rules() noexcept { return kClimateRules; }

const ClimateRule& match_climate_rule(const Weather& weather) noexcept {
  for (const auto& rule : kClimateRules) {
    if (rule.matches(weather)) return rule;
  }
  return kClimateRules.back();
}

std::string_view to_string(ReminderKind kind) noexcept {
  return kind == ReminderKind::Medicine ? "medicine" : "climate";
}

ReminderScheduler::ReminderScheduler(ReminderSchedule schedule) : schedule_(schedule) {
  schedule_.validate();
}

std::vector<Reminder> ReminderScheduler::due(Timestamp now, const WeatherProvider& weather) {
  std::vector<Reminder> out;
  if (schedule_.medicine_period_h) {
    const auto period = *schedule_.medicine_period_h * kSecondsPerHour;
    const auto target = firings_through(now, schedule_.medicine_anchor, period);
    for (; medicine_fired_ < target; ++medicine_fired_) {
      Reminder r;
      r.kind = ReminderKind::Medicine;
      r.due = schedule_.medicine_anchor + (medicine_fired_ + 1) * period;
      r.text = "Time to take your medicine.";
      out.push_back(std::move(r));
    }
  }
  if (schedule_.climate_period_d) {
    const auto period = *schedule_.climate_period_d * kSecondsPerDay;
    const auto target = firings_through(now, schedule_.climate_anchor, period);
    for (; climate_fired_ < target; ++climate_fired_) {
      Reminder r;
      r.kind = ReminderKind::Climate;
      r.due = schedule_.climate_anchor + (climate_fired_ + 1) * period;
      r.weather = weather ? weather(r.due) : std::nullopt;
      if (r.weather) {
        const auto& rule = match_climate_rule(*r.weather);
        r.rule_id = std::string(rule.id);
        r.text = describe(*r.weather) + ". " + std::string(rule.advice);
      } else {
        r.text = std::string(kWeatherUnavailable);
      }
      out.push_back(std::move(r));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Reminder& a, const Reminder& b) { return a.due < b.due; });
  return out;
}

}  // namespace icare::gateway
