// SPDX-License-Identifier: Apache-2.0
#include "icare/harness/virtual_clock.hpp"

#include <string>

#include "icare/common/errors.hpp"

namespace icare::harness {

void VirtualClock::schedule(Timestamp at, Action action) {
  if (at < now_) {
    throw ValidationError("cannot schedule at " + std::to_string(at) + ", clock is at " + std::to_string(now_));
  }
  queue_.push(Item{at, next_order_++, std::move(action)});
}

std::size_t VirtualClock::step(Timestamp until) {
  if (until < now_) {
    throw ValidationError("step to " + std::to_string(until) + " would move the clock back from " +
                          std::to_string(now_));
  }
  std::size_t ran = 0;
  while (!queue_.empty() && queue_.top().ts <= until) {
    // priority_queue::top is const; move the action out before popping.
    auto item = std::move(const_cast<Item&>(queue_.top()));
    queue_.pop();
    now_ = item.ts;
    item.action();
    ++ran;
  }
  now_ = until;
  return ran;
}

std::optional<Timestamp> VirtualClock::next_ts() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().ts;
}

}  // namespace icare::harness
