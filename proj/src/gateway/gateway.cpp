// SPDX-License-Identifier: Apache-2.0
#include "icare/gateway/gateway.hpp"

#include <algorithm>
#include <charconv>

#include "icare/common/errors.hpp"
#include "icare/protocol/classify.hpp"

namespace icare::gateway {

using protocol::GatewayEventKind;

namespace {

std::string format_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Gateway::Gateway(GatewayConfig config, PositionProvider position, WeatherProvider weather)
    : config_(std::move(config)),
      position_(config_.home_location, std::move(position)),
      weather_(std::move(weather)),
      mode_(config_.system_mode) {
  config_.validate();
  reminders_ = ReminderScheduler(config_.reminders);
  for (auto channel : config_.enabled_channels) {
    auto [it, _] = monitors_.emplace(channel, ChannelMonitor(channel));
    if (const auto t = config_.thresholds.find(channel); t != config_.thresholds.end()) {
      it->second.set_threshold(t->second);
    }
  }
  for (const auto& [channel, t] : config_.thresholds) {
    if (!monitors_.contains(channel)) inert_thresholds_[channel] = t;
  }
}

const ChannelMonitor* Gateway::monitor(VitalChannel channel) const {
  const auto it = monitors_.find(channel);
  return it == monitors_.end() ? nullptr : &it->second;
}

void Gateway::push_transition(Effects& out, VitalChannel channel, const ChannelMonitor::Transition& t) {
  if (t.changed()) out.push_back(StateChanged{channel, t.from, t.to});
}

Effects Gateway::ingest_sample(const protocol::VitalRecord& rec, Timestamp now) {
  Effects out;
  if (rec.elder_id != config_.elder_id) {
    out.push_back(SampleRejected{rec, "record for elder '" + rec.elder_id + "'"});
    return out;
  }
  if (!store_.append(rec)) {
    out.push_back(SampleRejected{rec, "duplicate or out-of-order seq"});
    return out;
  }
  const auto it = monitors_.find(rec.channel);
  const bool monitored = it != monitors_.end() && mode_ == SystemMode::Monitoring;
  out.push_back(SampleStored{rec, monitored});
  if (!monitored) return out;

  auto& mon = it->second;
  const auto t = mon.observe(rec.sensor_id, rec.value, rec.ts, now, config_.alarm_wait_s);
  push_transition(out, rec.channel, t);
  if (t.changed() && t.to == MonitorState::AlarmPending) {
    const auto episode = next_episode_++;
    open_episode_[rec.channel] = episode;
    const auto& p = *mon.pending();
    out.push_back(AlarmPrompt{rec.channel, episode, p.trigger_ts, p.deadline});
    store_.log_event(GatewayEventKind::AlarmRaised, now,
                     std::string(protocol::to_string(rec.channel)) + " episode " + std::to_string(episode));
  }
  return out;
}

Effects Gateway::dispatch_alarm(const std::string& sensor_id, std::optional<VitalChannel> channel,
                                std::uint64_t episode, Timestamp trigger_ts, Timestamp now) {
  Effects out;
  const auto location = position_.locate(now);
  const auto line = protocol::encode_sms(protocol::AlarmSms{now, config_.elder_id, sensor_id, location});
  for (const auto& target : config_.alarm_targets) out.push_back(SmsOut{target, line});
  out.push_back(AlarmDispatched{episode, sensor_id, channel, now, trigger_ts, config_.alarm_targets.size()});
  store_.record_alarm(AlarmEntry{now, sensor_id, channel, location, episode});
  store_.log_event(channel ? GatewayEventKind::AlarmDispatched : GatewayEventKind::QuickAlarm, now,
                   sensor_id + " " + location.to_wire());
  return out;
}

Effects Gateway::tick(Timestamp now) {
  Effects out;
  if (mode_ == SystemMode::Monitoring) {
    for (auto& [channel, mon] : monitors_) {
      const auto from = mon.state();
      if (auto episode = mon.expire(now)) {
        push_transition(out, channel, {from, mon.state()});
        auto more = dispatch_alarm(episode->sensor_id, channel, open_episode_[channel],
                                   episode->trigger_ts, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      }
    }
  }
  if (now >= last_flush_ + config_.bulk_interval_s) {
    last_flush_ = now;
    if (store_.pending_total() > 0) out.push_back(BulkOut{flush_bulk(now)});
  }
  for (auto& r : due_reminders(now)) out.push_back(ReminderFired{std::move(r)});
  return out;
}

Effects Gateway::respond_to_alarm_prompt(VitalChannel channel, AlarmResponse response, Timestamp now) {
  Effects out;
  const auto it = monitors_.find(channel);
  if (it == monitors_.end()) {
    out.push_back(Warning{"alarm response for unmonitored channel " + std::string(protocol::to_string(channel))});
    return out;
  }
  auto& mon = it->second;
  const auto from = mon.state();
  PendingAlarm episode;
  switch (mon.respond(response, now, &episode)) {
    case ChannelMonitor::ResponseOutcome::Ignored:
      out.push_back(Warning{std::string(to_string(response)) + " ignored on " +
                            std::string(protocol::to_string(channel)) + " in state " +
                            std::string(to_string(from))});
      break;
    case ChannelMonitor::ResponseOutcome::Cancelled:
      push_transition(out, channel, {from, mon.state()});
      out.push_back(AlarmCancelled{open_episode_[channel], channel, now});
      store_.log_event(GatewayEventKind::AlarmCancelled, now,
                       std::string(protocol::to_string(channel)) + " episode " +
                           std::to_string(open_episode_[channel]));
      break;
    case ChannelMonitor::ResponseOutcome::Confirmed: {
      push_transition(out, channel, {from, mon.state()});
      auto more = dispatch_alarm(episode.sensor_id, channel, open_episode_[channel], episode.trigger_ts, now);
      out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      break;
    }
  }
  return out;
}

Effects Gateway::quick_alarm(Timestamp now) {
  if (mode_ != SystemMode::Monitoring) return {Warning{"quick alarm ignored while paused"}};
  return dispatch_alarm(std::string(protocol::kQuickSensorId), std::nullopt, next_episode_++, now, now);
}

Effects Gateway::handle_inbound(const protocol::SmsMessage& msg, Timestamp now) {
  Effects out;
  const auto category = protocol::classify_inbound(msg);
  if (category == protocol::InboundCategory::Threshold) {
    const auto& t = std::get<protocol::ThresholdSms>(msg);
    if (t.elder_id != config_.elder_id) {
      out.push_back(Warning{"threshold addressed to '" + t.elder_id + "'"});
      return out;
    }
    const auto channel_name = std::string(protocol::to_string(t.channel));
    const auto it = monitors_.find(t.channel);
    if (it == monitors_.end()) {
      inert_thresholds_[t.channel] = t.to_threshold();
      out.push_back(Warning{"threshold for disabled channel " + channel_name + " stored but inert"});
      return out;
    }
    const auto tr = it->second.set_threshold(t.to_threshold());
    push_transition(out, t.channel, tr);
    std::string band = channel_name + " [" + format_value(t.low) + ", " + format_value(t.high) + "]";
    out.push_back(Notification{"threshold", "New threshold from " + t.doctor_id + ": " + band});
    store_.log_event(GatewayEventKind::ThresholdUpdated, now, band + " by " + t.doctor_id);
  } else {
    const auto& a = std::get<protocol::AdviceSms>(msg);
    if (a.elder_id != config_.elder_id) {
      out.push_back(Warning{"advice addressed to '" + a.elder_id + "'"});
      return out;
    }
    store_.record_advice(AdviceEntry{a.ts, now, a.doctor_id, a.text});
    out.push_back(Notification{"advice", "New advice from " + a.doctor_id + ". Read it now?"});
    store_.log_event(GatewayEventKind::AdviceReceived, now, a.doctor_id + ": " + a.text);
  }
  return out;
}

Effects Gateway::handle_sms_line(std::string_view line, Timestamp now) {
  try {
    return handle_inbound(protocol::decode_sms(line), now);
  } catch (const ProtocolError& e) {
    return {Warning{std::string("inbound sms rejected: ") + e.what()}};
  }
}

protocol::BulkFrame Gateway::flush_bulk(Timestamp) {
  auto frame = store_.pending_frame(next_frame_id_++, config_.elder_id);
  if (frame.size() > 0) in_flight_.emplace(frame.frame_id, frame);
  return frame;
}

Effects Gateway::on_ack(const protocol::BulkAck& ack, Timestamp) {
  const auto it = in_flight_.find(ack.frame_id);
  if (it == in_flight_.end()) return {Warning{"ack for unknown frame " + std::to_string(ack.frame_id)}};
  const auto drained = store_.drain(it->second, static_cast<std::size_t>(ack.accepted));
  in_flight_.erase(it);
  return {BulkSynced{ack.frame_id, ack.accepted, drained}};
}

Effects Gateway::on_transport_failure(std::uint64_t frame_id, Timestamp) {
  in_flight_.erase(frame_id);
  return {SyncFailed{frame_id, store_.pending_total()}};
}

Effects Gateway::set_mode(SystemMode mode, Timestamp) {
  Effects out;
  if (mode == mode_) return out;
  mode_ = mode;
  for (auto& [channel, mon] : monitors_) push_transition(out, channel, mon.reset());
  out.push_back(Notification{"mode", std::string("system mode ") + std::string(to_string(mode))});
  return out;
}

std::vector<Reminder> Gateway::due_reminders(Timestamp now) {
  auto due = reminders_.due(now, weather_);
  if (mode_ != SystemMode::Monitoring) due.clear();
  return due;
}

LocalQueryResult Gateway::query_local(LocalQuery kind) const {
  switch (kind) {
    case LocalQuery::Alarms: {
      std::vector<AlarmEntry> out(store_.alarms().rbegin(), store_.alarms().rend());
      return out;
    }
    case LocalQuery::Advice: {
      std::vector<AdviceEntry> out(store_.advice().rbegin(), store_.advice().rend());
      return out;
    }
    case LocalQuery::LatestVitals: {
      std::vector<protocol::VitalRecord> out;
      for (const auto& [channel, rec] : store_.latest()) out.push_back(rec);
      std::stable_sort(out.begin(), out.end(),
                       [](const auto& a, const auto& b) { return a.ts > b.ts; });
      return out;
    }
  }
  return std::vector<AlarmEntry>{};
}

}  // namespace icare::gateway
