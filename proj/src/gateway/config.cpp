// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/config.hpp"

#include "icare/common/errors.hpp"

namespace icare::gateway {

std::string_view to_string(SystemMode mode) noexcept {
  return mode == SystemMode::Monitoring ? "monitoring" : "paused";
}

void GatewayConfig::validate() const {
  if (!protocol::is_valid_id(elder_id)) throw ValidationError("invalid elder_id '" + elder_id + "'");
  if (alarm_wait_s < 1) throw ValidationError("alarm_wait_s must be >= 1");
  if (bulk_interval_s < 1) throw ValidationError("bulk_interval_s must be >= 1");
  if (system_mode == SystemMode::Monitoring && alarm_targets.empty()) {
    throw ValidationError("alarm_targets must be non-empty in monitoring mode");
  }
  for (const auto& t : alarm_targets) {
    if (!protocol::is_valid_id(t)) throw ValidationError("invalid alarm target '" + t + "'");
  }
  for (const auto& [channel, t] : thresholds) protocol::validate_band(t.low, t.high);
  reminders.validate();
}

namespace {

std::optional<int> parse_period(const TextEntry& e) {
  if (e.value == "off") return std::nullopt;
  return static_cast<int>(parse_int(e.value, e.line));
}

std::pair<double, double> parse_pair(const TextEntry& e) {
  const auto parts = split_list(e.value, ',');
  if (parts.size() != 2) throw ParseError(e.line, "expected two comma-separated numbers");
  return {parse_double(parts[0], e.line), parse_double(parts[1], e.line)};
}

// An extra key ending in '.' admits every key with that prefix.
bool is_extra_key(const std::set<std::string, std::less<>>& extra_keys, std::string_view key) {
  for (const auto& k : extra_keys) {
    if (k == key || (k.ends_with('.') && key.starts_with(k))) return true;
  }
  return false;
}

}  // namespace

GatewayConfig gateway_config_from(const TextSection& section,
                                  const std::set<std::string, std::less<>>& extra_keys) {
  GatewayConfig cfg;
  for (const auto& e : section.entries) {
    if (e.key.empty()) throw ParseError(e.line, "unexpected row in gateway config");
    const auto& key = e.key;
    try {
      if (key == "elder_id") {
        cfg.elder_id = e.value;
      } else if (key == "enabled_channels") {
        for (const auto& name : split_list(e.value, ',')) {
          const auto ch = protocol::parse_channel(name);
          if (!ch) throw ParseError(e.line, "unknown channel '" + name + "'");
          cfg.enabled_channels.insert(*ch);
        }
      } else if (key == "alarm_wait_s") {
        cfg.alarm_wait_s = parse_int(e.value, e.line);
      } else if (key == "bulk_interval_s") {
        cfg.bulk_interval_s = parse_int(e.value, e.line);
      } else if (key == "alarm_targets") {
        cfg.alarm_targets = split_list(e.value, ',');
      } else if (key == "system_mode") {
        if (e.value == "monitoring") {
          cfg.system_mode = SystemMode::Monitoring;
        } else if (e.value == "paused") {
          cfg.system_mode = SystemMode::Paused;
        } else {
          throw ParseError(e.line, "system_mode must be monitoring or paused");
        }
      } else if (key == "home_location") {
        const auto [lat, lon] = parse_pair(e);
        cfg.home_location = protocol::Location::from_degrees(lat, lon);
      } else if (key.starts_with("threshold.")) {
        const auto ch = protocol::parse_channel(std::string_view(key).substr(10));
        if (!ch) throw ParseError(e.line, "unknown channel in '" + key + "'");
        const auto [low, high] = parse_pair(e);
        protocol::validate_band(low, high);
        cfg.thresholds[*ch] = protocol::Threshold{*ch, low, high, "config", 0};
      } else if (key == "medicine_period_h") {
        cfg.reminders.medicine_period_h = parse_period(e);
      } else if (key == "medicine_anchor") {
        cfg.reminders.medicine_anchor = parse_int(e.value, e.line);
      } else if (key == "climate_period_d") {
        cfg.reminders.climate_period_d = parse_period(e);
      } else if (key == "climate_anchor") {
        cfg.reminders.climate_anchor = parse_int(e.value, e.line);
      } else if (!is_extra_key(extra_keys, key)) {
        throw ParseError(e.line, "unknown gateway key '" + key + "'");
      }
    } catch (const ValidationError& err) {
      throw ParseError(e.line, err.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ValidationError& err) {
    throw ParseError(section.line, err.what());
  }
  return cfg;
}

GatewayConfig load_gateway_config(const std::string& path) {
  const auto doc = load_text_document(path);
  return gateway_config_from(doc.root(), {"listen_sensors", "listen_sms", "server_bulk", "sms_route."});
}

}  // namespace icare::gateway
