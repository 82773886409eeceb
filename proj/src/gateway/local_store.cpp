// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/local_store.hpp"

#include <algorithm>

namespace icare::gateway {

bool LocalStore::append(const protocol::VitalRecord& rec) {
  if (const auto it = last_seq_.find(rec.sensor_id); it != last_seq_.end() && rec.seq <= it->second) {
    return false;
  }
  last_seq_[rec.sensor_id] = rec.seq;
  history_.push_back(rec);
  pending_.emplace(RecordKey{rec.sensor_id, rec.seq}, rec);
  auto [it, inserted] = latest_.try_emplace(rec.channel, rec);
  if (!inserted && rec.ts >= it->second.ts) it->second = rec;
  return true;
}

void LocalStore::log_event(protocol::GatewayEventKind kind, Timestamp ts, std::string detail) {
  const auto seq = next_event_seq_++;
  pending_events_.emplace(seq, protocol::GatewayEventRecord{seq, kind, ts, std::move(detail)});
}

protocol::BulkFrame LocalStore::pending_frame(std::uint64_t frame_id, const std::string& elder_id) const {
  protocol::BulkFrame frame;
  frame.frame_id = frame_id;
  frame.elder_id = elder_id;
  frame.records.reserve(pending_.size());
  for (const auto& [key, rec] : pending_) frame.records.push_back(rec);
  for (const auto& [seq, ev] : pending_events_) frame.events.push_back(ev);
  return frame;
}

std::size_t LocalStore::drain(const protocol::BulkFrame& frame, std::size_t count) {
  std::size_t drained = 0;
  const auto n_records = std::min(count, frame.records.size());
  for (std::size_t i = 0; i < n_records; ++i) {
    const auto& rec = frame.records[i];
    drained += pending_.erase(RecordKey{rec.sensor_id, rec.seq});
    auto& mark = acked_[rec.sensor_id];
    mark = std::max(mark, rec.seq);
  }
  const auto n_events = std::min(count - n_records, frame.events.size());
  for (std::size_t i = 0; i < n_events; ++i) drained += pending_events_.erase(frame.events[i].seq);
  return drained;
}

std::optional<std::uint64_t> LocalStore::watermark(const std::string& sensor_id) const {
  if (const auto it = acked_.find(sensor_id); it != acked_.end()) return it->second;
  return std::nullopt;
}

}  // namespace icare::gateway
