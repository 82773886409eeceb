// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON shapes shared by bulk payloads, the sensor stream and the HTTP API.

#include <json.hpp>

#include "icare/protocol/bulk.hpp"
#include "icare/protocol/types.hpp"

namespace icare::protocol {

nlohmann::json record_to_json(const VitalRecord& rec);
/// Throws ProtocolError on missing fields, unknown channel or non-finite value.
VitalRecord record_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const GatewayEventRecord& ev);
GatewayEventRecord event_from_json(const nlohmann::json& j);

nlohmann::json threshold_to_json(const Threshold& t);
nlohmann::json location_to_json(const Location& loc);

/// One record per line on the local sensor transport.
std::string encode_record_line(const VitalRecord& rec);
VitalRecord decode_record_line(std::string_view line);

}  // namespace icare::protocol
