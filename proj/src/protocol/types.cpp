// SPDX-License-Identifier: Apache-2.0
#include "icare/protocol/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "icare/common/errors.hpp"

namespace icare::protocol {

std::string_view to_string(VitalChannel channel) noexcept {
  switch (channel) {
    case VitalChannel::EcgHr: return "ECG_HR";
    case VitalChannel::SysBp: return "SYS_BP";
    case VitalChannel::DiaBp: return "DIA_BP";
    case VitalChannel::Activity: return "ACTIVITY";
  }
  return "?";
}

std::optional<VitalChannel> parse_channel(std::string_view name) noexcept {
  for (auto c : kAllChannels) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

Location Location::from_degrees(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
      lon > 180.0) {
    throw ValidationError("location out of range");
  }
  return Location(std::llround(lat * kScale), std::llround(lon * kScale));
}

Location Location::from_scaled(std::int64_t lat_e5, std::int64_t lon_e5) {
  if (lat_e5 < -90 * kScale || lat_e5 > 90 * kScale || lon_e5 < -180 * kScale ||
      lon_e5 > 180 * kScale) {
    throw ValidationError("location out of range");
  }
  return Location(lat_e5, lon_e5);
}

namespace {

void append_fixed5(std::string& out, std::int64_t scaled) {
  if (scaled < 0) {
    out.push_back('-');
    scaled = -scaled;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%05lld", static_cast<long long>(scaled / Location::kScale),
                static_cast<long long>(scaled % Location::kScale));
  out += buf;
}

std::optional<std::int64_t> parse_fixed5(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || s.size() - dot - 1 != 5) return std::nullopt;
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  const auto w = s.substr(0, dot);
  const auto f = s.substr(dot + 1);
  for (char c : s) {
    if (c != '.' && (c < '0' || c > '9')) return std::nullopt;
  }
  if (w.size() > 3) return std::nullopt;
  std::from_chars(w.data(), w.data() + w.size(), whole);
  std::from_chars(f.data(), f.data() + f.size(), frac);
  const auto v = whole * Location::kScale + frac;
  return negative ? -v : v;
}

}  // namespace

std::string Location::to_wire() const {
  std::string out;
  append_fixed5(out, lat_e5_);
  out.push_back(',');
  append_fixed5(out, lon_e5_);
  return out;
}

std::optional<Location> Location::parse_wire(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto lat = parse_fixed5(text.substr(0, comma));
  const auto lon = parse_fixed5(text.substr(comma + 1));
  if (!lat || !lon) return std::nullopt;
  if (*lat < -90 * kScale || *lat > 90 * kScale || *lon < -180 * kScale || *lon > 180 * kScale) {
    return std::nullopt;
  }
  return Location(*lat, *lon);
}

void validate_band(double low, double high) {
  if (!std::isfinite(low) || !std::isfinite(high)) throw ValidationError("threshold must be finite");
  if (low > high) throw ValidationError("low > high");
}

bool is_valid_id(std::string_view id) noexcept {
  if (id.empty()) return false;
  for (unsigned char c : id) {
    if (c < 0x21 || c > 0x7e || c == '|' || c == ',') return false;
  }
  return true;
}

}  // namespace icare::protocol
