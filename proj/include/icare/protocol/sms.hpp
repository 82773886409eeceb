// SPDX-License-Identifier: Apache-2.0
#pragma once

// Short messages on the simulated SMS bus, one LF-terminated ASCII line each:
//
//   ALARM|<ts>|<elder_id>|<sensor_id>|<lat>,<lon>
//   THRESH|<ts>|<elder_id>|<channel>|<low>|<high>|<doctor_id>
//   ADVICE|<ts>|<elder_id>|<doctor_id>|<text...>
//
// The ADVICE text is the final field and runs to the end of the line, so it
// may itself contain '|'.

#include <string>
#include <string_view>
#include <variant>

#include "icare/protocol/types.hpp"

namespace icare::protocol {

struct AlarmSms {
  Timestamp ts = 0;
  std::string elder_id;
  std::string sensor_id;
  Location location;

  friend bool operator==(const AlarmSms&, const AlarmSms&) = default;
};

struct ThresholdSms {
  Timestamp ts = 0;
  std::string elder_id;
  VitalChannel channel = VitalChannel::EcgHr;
  double low = 0.0;
  double high = 0.0;
  std::string doctor_id;

  Threshold to_threshold() const { return Threshold{channel, low, high, doctor_id, ts}; }

  friend bool operator==(const ThresholdSms&, const ThresholdSms&) = default;
};

struct AdviceSms {
  Timestamp ts = 0;
  std::string elder_id;
  std::string doctor_id;
  std::string text;

  friend bool operator==(const AdviceSms&, const AdviceSms&) = default;
};

using SmsMessage = std::variant<AlarmSms, ThresholdSms, AdviceSms>;

enum class SmsKind { Alarm, Threshold, Advice };

SmsKind kind_of(const SmsMessage& msg) noexcept;
std::string_view to_string(SmsKind kind) noexcept;

/// Throws ProtocolError when a field cannot be carried (non-ASCII text, bad id,
/// non-finite or inverted band).
std::string encode_sms(const SmsMessage& msg);

/// Accepts the line with or without its trailing LF or CRLF. Throws DecodeError naming
/// the offending field position.
SmsMessage decode_sms(std::string_view line);

}  // namespace icare::protocol
