// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "icare/protocol/types.hpp"

namespace icare::harness {

using protocol::Timestamp;

/// Discrete-event clock in integer seconds. Events at the same second run in
/// the order they were scheduled.
class VirtualClock {
 public:
  using Action = std::function<void()>;

  explicit VirtualClock(Timestamp start = 0) : now_(start) {}

  Timestamp now() const noexcept { return now_; }

  /// Throws ValidationError when `at` is in the past.
  void schedule(Timestamp at, Action action);

  /// Runs every event with ts <= until, including ones scheduled while
  /// stepping, then sets now to `until`. Returns how many ran.
  std::size_t step(Timestamp until);

  std::optional<Timestamp> next_ts() const;
  std::size_t pending() const noexcept { return queue_.size(); }

 private:
  struct Item {
    Timestamp ts;
    std::uint64_t order;
    Action action;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return a.ts != b.ts ? a.ts > b.ts : a.order > b.order;
    }
  };

  Timestamp now_;
  std::uint64_t next_order_ = 0;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
};

}  // namespace icare::harness
