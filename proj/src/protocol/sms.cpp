// SPDX-License-Identifier: Apache-2.0
#include "icare/protocol/sms.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include "icare/common/errors.hpp"

namespace icare::protocol {

namespace {

void require_id(std::string_view id, std::string_view what) {
  if (!is_valid_id(id)) throw ProtocolError("invalid " + std::string(what) + " '" + std::string(id) + "'");
}

void require_text(std::string_view text) {
  for (unsigned char c : text) {
    if (c < 0x20 || c > 0x7e) throw ProtocolError("advice text is not printable ASCII");
  }
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw ProtocolError("non-finite number");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

// Splits into at most `max_fields` pieces; the last piece keeps any further pipes.
std::vector<std::string_view> split_fields(std::string_view line, std::size_t max_fields) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (out.size() + 1 < max_fields) {
    const auto pos = line.find('|', start);
    if (pos == std::string_view::npos) break;
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(line.substr(start));
  return out;
}

Timestamp parse_ts(std::string_view s, std::size_t field) {
  Timestamp v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DecodeError(field, "unparsable timestamp '" + std::string(s) + "'");
  }
  return v;
}

double parse_number(std::string_view s, std::size_t field) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DecodeError(field, "unparsable number '" + std::string(s) + "'");
  }
  return v;
}

std::string parse_id(std::string_view s, std::size_t field) {
  if (!is_valid_id(s)) throw DecodeError(field, "invalid id '" + std::string(s) + "'");
  return std::string(s);
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n) {
  if (f.size() != n) {
    throw DecodeError(f.size() < n ? f.size() : n,
                      "wrong field count: expected " + std::to_string(n) + ", got " +
                          std::to_string(f.size()));
  }
}

}  // namespace

SmsKind kind_of(const SmsMessage& msg) noexcept {
  return static_cast<SmsKind>(msg.index());
}

std::string_view to_string(SmsKind kind) noexcept {
  switch (kind) {
    case SmsKind::Alarm: return "ALARM";
    case SmsKind::Threshold: return "THRESH";
    case SmsKind::Advice: return "ADVICE";
  }
  return "?";
}

std::string encode_sms(const SmsMessage& msg) {
  std::string out;
  if (const auto* a = std::get_if<AlarmSms>(&msg)) {
    require_id(a->elder_id, "elder id");
    require_id(a->sensor_id, "sensor id");
    out = "ALARM|" + std::to_string(a->ts) + "|" + a->elder_id + "|" + a->sensor_id + "|" +
          a->location.to_wire();
  } else if (const auto* t = std::get_if<ThresholdSms>(&msg)) {
    require_id(t->elder_id, "elder id");
    require_id(t->doctor_id, "doctor id");
    if (!std::isfinite(t->low) || !std::isfinite(t->high)) throw ProtocolError("non-finite threshold");
    if (t->low > t->high) throw ProtocolError("low > high");
    out = "THRESH|" + std::to_string(t->ts) + "|" + t->elder_id + "|" + std::string(to_string(t->channel)) +
          "|" + format_number(t->low) + "|" + format_number(t->high) + "|" + t->doctor_id;
  } else {
    const auto& v = std::get<AdviceSms>(msg);
    require_id(v.elder_id, "elder id");
    require_id(v.doctor_id, "doctor id");
    require_text(v.text);
    out = "ADVICE|" + std::to_string(v.ts) + "|" + v.elder_id + "|" + v.doctor_id + "|" + v.text;
  }
  out.push_back('\n');
  return out;
}

SmsMessage decode_sms(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  for (unsigned char c : line) {
    if (c < 0x20 || c > 0x7e) throw DecodeError(0, "line is not printable ASCII");
  }

  const auto tag_end = line.find('|');
  const auto tag = line.substr(0, tag_end);

  if (tag == "ALARM") {
    const auto f = split_fields(line, 6);
    expect_fields(f, 5);
    AlarmSms a;
    a.ts = parse_ts(f[1], 1);
    a.elder_id = parse_id(f[2], 2);
    a.sensor_id = parse_id(f[3], 3);
    const auto loc = Location::parse_wire(f[4]);
    if (!loc) throw DecodeError(4, "unparsable location '" + std::string(f[4]) + "'");
    a.location = *loc;
    return a;
  }
  if (tag == "THRESH") {
    const auto f = split_fields(line, 8);
    expect_fields(f, 7);
    ThresholdSms t;
    t.ts = parse_ts(f[1], 1);
    t.elder_id = parse_id(f[2], 2);
    const auto ch = parse_channel(f[3]);
    if (!ch) throw DecodeError(3, "unknown channel '" + std::string(f[3]) + "'");
    t.channel = *ch;
    t.low = parse_number(f[4], 4);
    t.high = parse_number(f[5], 5);
    if (t.low > t.high) throw DecodeError(5, "low > high");
    t.doctor_id = parse_id(f[6], 6);
    return t;
  }
  if (tag == "ADVICE") {
    const auto f = split_fields(line, 5);
    expect_fields(f, 5);
    AdviceSms v;
    v.ts = parse_ts(f[1], 1);
    v.elder_id = parse_id(f[2], 2);
    v.doctor_id = parse_id(f[3], 3);
    v.text = std::string(f[4]);
    return v;
  }
  throw DecodeError(0, "unknown kind '" + std::string(tag) + "'");
}

}  // namespace icare::protocol
