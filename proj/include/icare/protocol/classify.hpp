// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <variant>

#include "icare/protocol/sms.hpp"
#include "icare/protocol/types.hpp"

namespace icare::protocol {

enum class InboundCategory { Threshold, Advice, Physiological };

std::string_view to_string(InboundCategory category) noexcept;

using Inbound = std::variant<SmsMessage, VitalRecord>;

/// ALARM is outbound-only; handing one to the gateway throws ProtocolError.
InboundCategory classify_inbound(const SmsMessage& msg);
InboundCategory classify_inbound(const VitalRecord& rec) noexcept;
InboundCategory classify_inbound(const Inbound& in);

}  // namespace icare::protocol
