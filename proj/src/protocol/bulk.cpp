// SPDX-License-Identifier: Apache-2.0
#include "icare/protocol/bulk.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "icare/common/errors.hpp"
#include "icare/protocol/json.hpp"

namespace icare::protocol {

using nlohmann::json;

std::string_view to_string(GatewayEventKind kind) noexcept {
  switch (kind) {
    case GatewayEventKind::AlarmRaised: return "alarm_raised";
    case GatewayEventKind::AlarmCancelled: return "alarm_cancelled";
    case GatewayEventKind::AlarmDispatched: return "alarm_dispatched";
    case GatewayEventKind::QuickAlarm: return "quick_alarm";
    case GatewayEventKind::AdviceReceived: return "advice_received";
    case GatewayEventKind::ThresholdUpdated: return "threshold_updated";
  }
  return "?";
}

std::optional<GatewayEventKind> parse_event_kind(std::string_view name) noexcept {
  for (auto k : {GatewayEventKind::AlarmRaised, GatewayEventKind::AlarmCancelled,
                 GatewayEventKind::AlarmDispatched, GatewayEventKind::QuickAlarm,
                 GatewayEventKind::AdviceReceived, GatewayEventKind::ThresholdUpdated}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_well_ordered(const BulkFrame& frame) noexcept {
  const bool records_sorted = std::is_sorted(
      frame.records.begin(), frame.records.end(), [](const VitalRecord& a, const VitalRecord& b) {
        return std::tie(a.sensor_id, a.seq) < std::tie(b.sensor_id, b.seq);
      });
  const bool events_sorted =
      std::is_sorted(frame.events.begin(), frame.events.end(),
                     [](const GatewayEventRecord& a, const GatewayEventRecord& b) { return a.seq < b.seq; });
  return records_sorted && events_sorted;
}

Bytes frame_payload(std::string_view payload) {
  if (payload.size() > kMaxFramePayload) throw ProtocolError("frame payload too large");
  Bytes out;
  out.reserve(kFrameHeaderSize + payload.size());
  const auto n = static_cast<std::uint32_t>(payload.size());
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

namespace {

std::uint32_t read_length(std::span<const std::uint8_t> bytes) {
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

json parse_payload(std::span<const std::uint8_t> bytes) {
  const auto payload = unframe_payload(bytes);
  auto j = json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed payload");
  return j;
}

}  // namespace

std::string unframe_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) throw ProtocolError("truncated frame header");
  const auto declared = read_length(bytes);
  const auto present = bytes.size() - kFrameHeaderSize;
  if (declared > present) {
    throw ProtocolError("truncated frame: declared " + std::to_string(declared) + " bytes, " +
                        std::to_string(present) + " present");
  }
  if (declared < present) {
    throw ProtocolError("length mismatch: declared " + std::to_string(declared) + " bytes, " +
                        std::to_string(present) + " present");
  }
  return std::string(bytes.begin() + kFrameHeaderSize, bytes.end());
}

Bytes frame_bulk(const BulkFrame& frame) {
  if (!is_well_ordered(frame)) throw ProtocolError("bulk frame records out of order");
  json records = json::array();
  for (const auto& r : frame.records) {
    if (!std::isfinite(r.value)) throw ProtocolError("non-finite value in bulk frame");
    records.push_back(record_to_json(r));
  }
  json events = json::array();
  for (const auto& e : frame.events) events.push_back(event_to_json(e));
  const json payload{{"frame", frame.frame_id}, {"elder_id", frame.elder_id},
                     {"records", std::move(records)}, {"events", std::move(events)}};
  return frame_payload(payload.dump());
}

BulkFrame unframe_bulk(std::span<const std::uint8_t> bytes) {
  const auto j = parse_payload(bytes);
  BulkFrame frame;
  try {
    frame.frame_id = j.at("frame").get<std::uint64_t>();
    frame.elder_id = j.at("elder_id").get<std::string>();
    for (const auto& r : j.at("records")) frame.records.push_back(record_from_json(r));
    for (const auto& e : j.at("events")) frame.events.push_back(event_from_json(e));
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed payload: ") + e.what());
  }
  if (!is_well_ordered(frame)) throw ProtocolError("malformed payload: records out of order");
  return frame;
}

Bytes frame_ack(const BulkAck& ack) {
  return frame_payload(json{{"frame", ack.frame_id}, {"ack", ack.accepted}}.dump());
}

BulkAck unframe_ack(std::span<const std::uint8_t> bytes) {
  const auto j = parse_payload(bytes);
  try {
    return BulkAck{j.at("frame").get<std::uint64_t>(), j.at("ack").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed ack: ") + e.what());
  }
}

void FrameReader::feed(std::span<const std::uint8_t> chunk) {
  buffer_.insert(buffer_.end(), chunk.begin(), chunk.end());
}

std::optional<Bytes> FrameReader::next() {
  if (buffer_.size() < kFrameHeaderSize) return std::nullopt;
  const auto declared = read_length(buffer_);
  if (declared > kMaxFramePayload) throw ProtocolError("frame payload too large");
  const auto total = kFrameHeaderSize + declared;
  if (buffer_.size() < total) return std::nullopt;
  Bytes frame(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(total));
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(total));
  return frame;
}

}  // namespace icare::protocol
