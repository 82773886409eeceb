// SPDX-License-Identifier: Apache-2.0
#include "icare/protocol/json.hpp"

#include <cmath>

#include "icare/common/errors.hpp"

namespace icare::protocol {

using nlohmann::json;

json record_to_json(const VitalRecord& rec) {
  return json{{"elder_id", rec.elder_id}, {"sensor_id", rec.sensor_id},
              {"channel", to_string(rec.channel)}, {"seq", rec.seq},
              {"ts", rec.ts}, {"value", rec.value}};
}

VitalRecord record_from_json(const json& j) {
  try {
    VitalRecord rec;
    rec.elder_id = j.at("elder_id").get<std::string>();
    rec.sensor_id = j.at("sensor_id").get<std::string>();
    const auto ch = parse_channel(j.at("channel").get<std::string>());
    if (!ch) throw ProtocolError("unknown channel");
    rec.channel = *ch;
    rec.seq = j.at("seq").get<std::uint64_t>();
    rec.ts = j.at("ts").get<Timestamp>();
    rec.value = j.at("value").get<double>();
    if (!std::isfinite(rec.value)) throw ProtocolError("non-finite value");
    if (!is_valid_id(rec.elder_id) || !is_valid_id(rec.sensor_id)) throw ProtocolError("invalid id");
    return rec;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed record: ") + e.what());
  }
}

json event_to_json(const GatewayEventRecord& ev) {
  return json{{"seq", ev.seq}, {"kind", to_string(ev.kind)}, {"ts", ev.ts}, {"detail", ev.detail}};
}

GatewayEventRecord event_from_json(const json& j) {
  try {
    GatewayEventRecord ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw ProtocolError("unknown event kind");
    ev.kind = *kind;
    ev.ts = j.at("ts").get<Timestamp>();
    ev.detail = j.at("detail").get<std::string>();
    return ev;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed event: ") + e.what());
  }
}

json threshold_to_json(const Threshold& t) {
  return json{{"channel", to_string(t.channel)}, {"low", t.low}, {"high", t.high},
              {"set_by", t.set_by}, {"ts", t.ts}};
}

json location_to_json(const Location& loc) {
  return json{{"lat", loc.lat()}, {"lon", loc.lon()}, {"wire", loc.to_wire()}};
}

std::string encode_record_line(const VitalRecord& rec) {
  if (!std::isfinite(rec.value)) throw ProtocolError("non-finite value");
  return record_to_json(rec).dump() + "\n";
}

VitalRecord decode_record_line(std::string_view line) {
  const auto j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed record line");
  return record_from_json(j);
}

}  // namespace icare::protocol
