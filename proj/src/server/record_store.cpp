// SPDX-License-Identifier: Apache-2.0
#include "icare/server/record_store.hpp"

#include <algorithm>

namespace icare::server {

IngestResult HealthRecordStore::ingest(const protocol::BulkFrame& frame) {
  IngestResult result;
  result.processed = frame.size();
  auto& data = subjects_[frame.elder_id];
  for (const auto& rec : frame.records) {
    if (data.records.emplace(RecordKey{rec.sensor_id, rec.seq}, rec).second) {
      result.inserted.push_back(rec);
    } else {
      ++result.duplicates;
    }
  }
  for (const auto& ev : frame.events) {
    if (data.event_seqs.insert(ev.seq).second) {
      data.history.push_back(HistoryEvent{ev.ts, std::string(protocol::to_string(ev.kind)), ev.detail, "gateway"});
      result.inserted_events.push_back(ev);
    } else {
      ++result.duplicates;
    }
  }
  return result;
}

const HealthRecordStore::SubjectData* HealthRecordStore::find(std::string_view subject) const {
  const auto it = subjects_.find(subject);
  return it == subjects_.end() ? nullptr : &it->second;
}

std::vector<protocol::VitalRecord> HealthRecordStore::records(std::string_view subject, Timestamp since) const {
  std::vector<protocol::VitalRecord> out;
  if (const auto* d = find(subject)) {
    for (const auto& [key, rec] : d->records) {
      if (rec.ts >= since) out.push_back(rec);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.ts, a.sensor_id, a.seq) < std::tie(b.ts, b.sensor_id, b.seq);
  });
  return out;
}

std::size_t HealthRecordStore::record_count(std::string_view subject) const {
  const auto* d = find(subject);
  return d == nullptr ? 0 : d->records.size();
}

std::set<HealthRecordStore::RecordKey> HealthRecordStore::record_keys(std::string_view subject) const {
  std::set<RecordKey> out;
  if (const auto* d = find(subject)) {
    for (const auto& [key, rec] : d->records) out.insert(key);
  }
  return out;
}

void HealthRecordStore::set_threshold(const std::string& subject, const protocol::Threshold& threshold) {
  subjects_[subject].thresholds[threshold.channel] = threshold;
}

std::map<protocol::VitalChannel, protocol::Threshold> HealthRecordStore::thresholds(std::string_view subject) const {
  const auto* d = find(subject);
  return d == nullptr ? std::map<protocol::VitalChannel, protocol::Threshold>{} : d->thresholds;
}

void HealthRecordStore::append_history(const std::string& subject, HistoryEvent event) {
  subjects_[subject].history.push_back(std::move(event));
}

std::vector<HistoryEvent> HealthRecordStore::history(std::string_view subject) const {
  const auto* d = find(subject);
  return d == nullptr ? std::vector<HistoryEvent>{} : d->history;
}

std::vector<HistoryEvent> HealthRecordStore::alarms(std::string_view subject) const {
  std::vector<HistoryEvent> out;
  if (const auto* d = find(subject)) {
    for (auto it = d->history.rbegin(); it != d->history.rend(); ++it) {
      if (it->kind.starts_with("alarm_") || it->kind == "quick_alarm") out.push_back(*it);
    }
  }
  return out;
}

}  // namespace icare::server
