// SPDX-License-Identifier: Apache-2.0
#include "icare/protocol/classify.hpp"

#include "icare/common/errors.hpp"

namespace icare::protocol {

std::string_view to_string(InboundCategory category) noexcept {
  switch (category) {
    case InboundCategory::Threshold: return "threshold";
    case InboundCategory::Advice: return "advice";
    case InboundCategory::Physiological: return "physiological";
  }
  return "?";
}

InboundCategory classify_inbound(const SmsMessage& msg) {
  switch (kind_of(msg)) {
    case SmsKind::Threshold: return InboundCategory::Threshold;
    case SmsKind::Advice: return InboundCategory::Advice;
    case SmsKind::Alarm: break;
  }
  throw ProtocolError("ALARM is outbound-only and cannot be received by a gateway");
}

InboundCategory classify_inbound(const VitalRecord&) noexcept {
  return InboundCategory::Physiological;
}

InboundCategory classify_inbound(const Inbound& in) {
  return std::visit([](const auto& v) { return classify_inbound(v); }, in);
}

}  // namespace icare::protocol
