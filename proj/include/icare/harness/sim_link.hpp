// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "icare/sensors/scenario.hpp"

namespace icare::harness {

using protocol::Timestamp;

struct LinkCounts {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;  // extra copies put on the wire

  /// Every sent message (plus duplicates) was delivered or dropped.
  bool balanced() const noexcept { return sent + duplicated == delivered + dropped; }
};

/// Scripted one-way link. Message indices count sends from zero; the drop and
/// duplicate schedules refer to them.
class SimLink {
 public:
  struct Plan {
    std::uint64_t index = 0;
    int copies = 0;  // 0 when dropped
    Timestamp deliver_at = 0;
  };

  SimLink(std::string name, sensors::LinkSpec spec) : name_(std::move(name)), spec_(std::move(spec)) {}

  /// Decides the fate of the next message sent at `now`.
  Plan send(Timestamp now);
  void mark_delivered() noexcept { ++counts_.delivered; }
  /// The next message is lost regardless of the schedule.
  void drop_next() noexcept { drop_next_ = true; }

  const std::string& name() const noexcept { return name_; }
  const sensors::LinkSpec& spec() const noexcept { return spec_; }
  const LinkCounts& counts() const noexcept { return counts_; }

 private:
  std::string name_;
  sensors::LinkSpec spec_;
  LinkCounts counts_;
  bool drop_next_ = false;
};

}  // namespace icare::harness
