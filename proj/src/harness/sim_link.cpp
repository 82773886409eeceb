// SPDX-License-Identifier: Apache-2.0
#include "icare/harness/sim_link.hpp"

namespace icare::harness {

SimLink::Plan SimLink::send(Timestamp now) {
  Plan plan;
  plan.index = counts_.sent++;
  plan.deliver_at = now + spec_.latency_s;
  if (drop_next_ || spec_.drop.count(plan.index)) {
    drop_next_ = false;
    ++counts_.dropped;
    return plan;
  }
  plan.copies = 1;
  if (spec_.duplicate.count(plan.index)) {
    plan.copies = 2;
    ++counts_.duplicated;
  }
  return plan;
}

}  // namespace icare::harness
