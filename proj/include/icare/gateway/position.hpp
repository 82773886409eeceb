// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>

#include "icare/protocol/types.hpp"

namespace icare::gateway {

using PositionProvider = std::function<std::optional<protocol::Location>(protocol::Timestamp)>;

/// Wraps a pluggable fix provider. When the provider has no fix the last known
/// location is reused, starting from the configured home location.
class PositionSource {
 public:
  explicit PositionSource(protocol::Location home, PositionProvider provider = {})
      : last_known_(home), provider_(std::move(provider)) {}

  protocol::Location locate(protocol::Timestamp now) {
    if (provider_) {
      if (auto fix = provider_(now)) last_known_ = *fix;
    }
    return last_known_;
  }

  protocol::Location last_known() const noexcept { return last_known_; }

 private:
  protocol::Location last_known_;
  PositionProvider provider_;
};

}  // namespace icare::gateway
