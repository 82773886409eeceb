// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gateway -> server bulk upload. Each frame is a u32 big-endian payload length
// followed by a UTF-8 JSON payload. The server answers every bulk frame with
// an ack frame carrying the number of records it processed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icare/protocol/types.hpp"

namespace icare::protocol {

enum class GatewayEventKind {
  AlarmRaised,
  AlarmCancelled,
  AlarmDispatched,
  QuickAlarm,
  AdviceReceived,
  ThresholdUpdated,
};

std::string_view to_string(GatewayEventKind kind) noexcept;
std::optional<GatewayEventKind> parse_event_kind(std::string_view name) noexcept;

/// Non-vital history the gateway uploads alongside samples. `seq` is unique
/// per gateway and is the server's dedup key.
struct GatewayEventRecord {
  std::uint64_t seq = 0;
  GatewayEventKind kind = GatewayEventKind::AlarmRaised;
  Timestamp ts = 0;
  std::string detail;

  friend bool operator==(const GatewayEventRecord&, const GatewayEventRecord&) = default;
};

struct BulkFrame {
  std::uint64_t frame_id = 0;
  std::string elder_id;
  std::vector<VitalRecord> records;        // sorted by (sensor_id, seq)
  std::vector<GatewayEventRecord> events;  // sorted by seq

  std::size_t size() const noexcept { return records.size() + events.size(); }

  friend bool operator==(const BulkFrame&, const BulkFrame&) = default;
};

struct BulkAck {
  std::uint64_t frame_id = 0;
  std::uint64_t accepted = 0;

  friend bool operator==(const BulkAck&, const BulkAck&) = default;
};

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kFrameHeaderSize = 4;
inline constexpr std::size_t kMaxFramePayload = 64u * 1024u * 1024u;

Bytes frame_payload(std::string_view payload);
/// Exact inverse of frame_payload. Throws ProtocolError on a short header,
/// a truncated payload or trailing bytes.
std::string unframe_payload(std::span<const std::uint8_t> bytes);

/// Throws ProtocolError when the frame breaks its ordering invariants or holds
/// a non-finite value.
Bytes frame_bulk(const BulkFrame& frame);
BulkFrame unframe_bulk(std::span<const std::uint8_t> bytes);

Bytes frame_ack(const BulkAck& ack);
BulkAck unframe_ack(std::span<const std::uint8_t> bytes);

/// True when records are ordered by (sensor_id, seq) and events by seq.
bool is_well_ordered(const BulkFrame& frame) noexcept;

/// Incremental splitter for frames arriving over a byte stream.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> chunk);
  /// Next complete frame (header included), if one is buffered.
  std::optional<Bytes> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  Bytes buffer_;
};

}  // namespace icare::protocol
