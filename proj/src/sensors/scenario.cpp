// SPDX-License-Identifier: Apache-2.0
#include "icare/sensors/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "icare/common/errors.hpp"
#include "icare/common/text_document.hpp"

namespace icare::sensors {

namespace {

protocol::VitalChannel channel_at(std::string_view name, std::size_t line) {
  const auto ch = protocol::parse_channel(name);
  if (!ch) throw ParseError(line, "unknown channel '" + std::string(name) + "'");
  return *ch;
}

std::set<std::uint64_t> index_set(const TextSection& s, std::string_view key) {
  std::set<std::uint64_t> out;
  const auto* e = s.find(key);
  if (e == nullptr) return out;
  for (const auto& item : split_list(e->value, ',')) {
    const auto v = parse_int(item, e->line);
    if (v < 0) throw ParseError(e->line, "message index must be >= 0");
    out.insert(static_cast<std::uint64_t>(v));
  }
  return out;
}

SensorSpec parse_sensor(const TextSection& s) {
  SensorSpec spec;
  spec.sensor_id = s.arg;
  const auto* ch = s.find("channel");
  if (ch == nullptr) throw ParseError(s.line, "sensor needs a channel");
  spec.channel = channel_at(ch->value, ch->line);
  spec.period_s = s.get_int("period", 1);

  const auto kind = s.get("generator").value_or("constant");
  if (kind == "constant") {
    spec.generator = ConstantWave{s.require_double("value")};
  } else if (kind == "ramp") {
    spec.generator = RampWave{s.require_double("start"), s.require_double("slope")};
  } else if (kind == "script") {
    const auto* e = s.find("points");
    if (e == nullptr) throw ParseError(s.line, "script sensor needs points");
    ScriptWave wave;
    for (const auto& item : split_list(e->value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ParseError(e->line, "script point must be ts:value");
      wave.points.emplace_back(parse_int(item.substr(0, colon), e->line),
                               parse_double(item.substr(colon + 1), e->line));
    }
    for (std::size_t i = 1; i < wave.points.size(); ++i) {
      if (wave.points[i].first <= wave.points[i - 1].first) {
        throw ParseError(e->line, "script timestamps must be strictly increasing");
      }
    }
    spec.generator = std::move(wave);
  } else {
    throw ParseError(s.find("generator")->line, "unknown generator '" + kind + "'");
  }
  try {
    spec.validate();
  } catch (const ValidationError& err) {
    throw ParseError(s.line, err.what());
  }
  return spec;
}

ScenarioEvent parse_event(const TextEntry& row) {
  const auto line = row.line;
  const auto head = split_ws_rest(row.value, 2);
  if (head.size() < 2) throw ParseError(line, "event needs '<ts> <action>'");
  ScenarioEvent ev;
  ev.line = line;
  ev.ts = parse_int(head[0], line);
  if (ev.ts < 0) throw ParseError(line, "event timestamp must be >= 0");
  const auto& action = head[1];
  const std::string rest = head.size() > 2 ? head[2] : std::string{};
  const auto args = split_ws(rest);
  const auto want = [&](std::size_t n) {
    if (args.size() != n) {
      throw ParseError(line, "'" + action + "' takes " + std::to_string(n) + " argument(s)");
    }
  };

  if (action == "sms") {
    if (rest.empty()) throw ParseError(line, "'sms' needs a line");
    ev.action = InjectSms{rest};
  } else if (action == "respond") {
    want(2);
    UserResponse r;
    r.channel = channel_at(args[0], line);
    if (args[1] == "cancel") {
      r.response = gateway::AlarmResponse::Cancel;
    } else if (args[1] == "confirm") {
      r.response = gateway::AlarmResponse::Confirm;
    } else {
      throw ParseError(line, "response must be cancel or confirm");
    }
    ev.action = r;
  } else if (action == "quick_alarm") {
    want(0);
    ev.action = PressQuickAlarm{};
  } else if (action == "set_threshold") {
    want(4);
    DoctorThreshold t{args[0], channel_at(args[1], line), parse_double(args[2], line),
                      parse_double(args[3], line)};
    if (t.low > t.high) throw ParseError(line, "low > high");
    ev.action = t;
  } else if (action == "advice") {
    const auto parts = split_ws_rest(rest, 1);
    if (parts.size() != 2) throw ParseError(line, "'advice' needs a doctor and text");
    ev.action = DoctorAdvice{parts[0], parts[1]};
  } else if (action == "mode") {
    want(1);
    if (args[0] == "monitoring") {
      ev.action = SwitchMode{gateway::SystemMode::Monitoring};
    } else if (args[0] == "paused") {
      ev.action = SwitchMode{gateway::SystemMode::Paused};
    } else {
      throw ParseError(line, "mode must be monitoring or paused");
    }
  } else if (action == "drop") {
    want(1);
    if (std::find(kLinkNames.begin(), kLinkNames.end(), args[0]) == kLinkNames.end()) {
      throw ParseError(line, "unknown link '" + args[0] + "'");
    }
    ev.action = DropNext{args[0]};
  } else if (action == "move") {
    if (args.size() == 1 && args[0] == "lost") {
      ev.action = MoveTo{std::nullopt};
    } else {
      want(2);
      try {
        ev.action = MoveTo{protocol::Location::from_degrees(parse_double(args[0], line), parse_double(args[1], line))};
      } catch (const ValidationError& err) {
        throw ParseError(line, err.what());
      }
    }
  } else {
    throw ParseError(line, "unknown event action '" + action + "'");
  }
  return ev;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const auto doc = parse_text_document(text);
  Scenario sc;

  const auto* head = doc.first("scenario");
  if (head == nullptr) throw ParseError(1, "missing [scenario] section");
  sc.name = head->get("name").value_or("unnamed");
  sc.horizon_s = head->require_int("horizon");
  if (sc.horizon_s < 0) throw ParseError(head->find("horizon")->line, "horizon must be >= 0");
  sc.emergency_target = head->get("emergency_target").value_or("EC");
  const auto default_latency = head->get_int("link_latency", 0);
  if (default_latency < 0) throw ParseError(head->find("link_latency")->line, "latency must be >= 0");
  for (const auto& e : head->entries) {
    if (e.key != "name" && e.key != "horizon" && e.key != "emergency_target" && e.key != "link_latency") {
      throw ParseError(e.line, "unknown scenario key '" + e.key + "'");
    }
  }

  const auto* gw = doc.first("gateway");
  if (gw == nullptr) throw ParseError(head->line, "missing [gateway] section");
  sc.gateway = gateway::gateway_config_from(*gw);

  std::set<std::string> seen_sensors;
  for (const auto* s : doc.all("sensor")) {
    auto spec = parse_sensor(*s);
    if (!seen_sensors.insert(spec.sensor_id).second) {
      throw ParseError(s->line, "duplicate sensor '" + spec.sensor_id + "'");
    }
    sc.sensors.push_back(std::move(spec));
  }

  for (auto name : kLinkNames) sc.links[std::string(name)].latency_s = default_latency;
  for (const auto* s : doc.all("link")) {
    if (std::find(kLinkNames.begin(), kLinkNames.end(), s->arg) == kLinkNames.end()) {
      throw ParseError(s->line, "unknown link '" + s->arg + "'");
    }
    auto& link = sc.links[s->arg];
    link.latency_s = s->get_int("latency", default_latency);
    if (link.latency_s < 0) throw ParseError(s->line, "latency must be >= 0");
    link.drop = index_set(*s, "drop");
    link.duplicate = index_set(*s, "duplicate");
  }

  if (const auto* w = doc.first("weather")) {
    for (const auto* row : w->rows()) {
      const auto t = split_ws(row->value);
      if (t.size() < 2 || t.size() > 3) throw ParseError(row->line, "weather row is '<ts> <temp_c> [rain]'");
      WeatherPoint p;
      p.ts = parse_int(t[0], row->line);
      if (t[1] != "unavailable") {
        gateway::Weather weather{parse_double(t[1], row->line), false};
        if (t.size() == 3) {
          if (t[2] != "rain") throw ParseError(row->line, "expected 'rain'");
          weather.rain = true;
        }
        p.weather = weather;
      }
      if (!sc.weather.empty() && p.ts <= sc.weather.back().ts) {
        throw ParseError(row->line, "weather timestamps must be strictly increasing");
      }
      sc.weather.push_back(p);
    }
  }

  if (const auto* u = doc.first("users")) {
    for (const auto* row : u->rows()) {
      const auto t = split_ws_rest(row->value, 3);
      if (t.size() < 3) throw ParseError(row->line, "user row is '<id> <role> <token> [name]'");
      sc.users.push_back(UserSeed{t[0], t[1], t[2], t.size() > 3 ? t[3] : t[0]});
    }
  }
  for (auto [section, target] : {std::pair{"assignments", &sc.assignments}, std::pair{"grants", &sc.grants}}) {
    if (const auto* s = doc.first(section)) {
      for (const auto* row : s->rows()) {
        const auto t = split_ws(row->value);
        if (t.size() != 2) throw ParseError(row->line, std::string(section) + " row takes two ids");
        target->emplace_back(t[0], t[1]);
      }
    }
  }

  if (const auto* ev = doc.first("events")) {
    for (const auto* row : ev->rows()) {
      auto event = parse_event(*row);
      if (event.ts > sc.horizon_s) {
        throw ParseError(row->line, "event at " + std::to_string(event.ts) + " is beyond horizon " +
                                        std::to_string(sc.horizon_s));
      }
      sc.events.push_back(std::move(event));
    }
    for (const auto& e : ev->entries) {
      if (!e.key.empty()) throw ParseError(e.line, "[events] holds rows, not keys");
    }
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.ts < b.ts; });
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace icare::sensors
