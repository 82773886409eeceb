// SPDX-License-Identifier: Apache-2.0
#include "icare/server/server.hpp"

#include <algorithm>
#include <cstdio>

#include "icare/common/errors.hpp"
#include "icare/protocol/json.hpp"

namespace icare::server {

using nlohmann::json;
using protocol::GatewayEventKind;

namespace {

json frame_payload_json(const protocol::BulkFrame& f) {
  json records = json::array();
  for (const auto& r : f.records) records.push_back(protocol::record_to_json(r));
  json events = json::array();
  for (const auto& e : f.events) events.push_back(protocol::event_to_json(e));
  return json{{"elder_id", f.elder_id}, {"frame", f.frame_id}, {"records", records}, {"events", events}};
}

protocol::BulkFrame frame_from_json(const json& j) {
  protocol::BulkFrame f;
  f.frame_id = j.at("frame").get<std::uint64_t>();
  f.elder_id = j.at("elder_id").get<std::string>();
  for (const auto& r : j.at("records")) f.records.push_back(protocol::record_from_json(r));
  for (const auto& e : j.at("events")) f.events.push_back(protocol::event_from_json(e));
  return f;
}

bool is_alarm_kind(GatewayEventKind k) {
  return k == GatewayEventKind::AlarmRaised || k == GatewayEventKind::AlarmCancelled ||
         k == GatewayEventKind::AlarmDispatched || k == GatewayEventKind::QuickAlarm;
}

}  // namespace

Server::Server(Directory directory, ServerOptions options)
    : directory_(std::move(directory)), options_(std::move(options)) {
  if (options_.data_dir) {
    replay();
    const auto& dir = *options_.data_dir;
    records_journal_ = std::make_unique<Journal>(dir / "records.jsonl");
    knowledge_journal_ = std::make_unique<Journal>(dir / "knowledge.jsonl");
    threads_journal_ = std::make_unique<Journal>(dir / "threads.jsonl");
    grants_journal_ = std::make_unique<Journal>(dir / "grants.jsonl");
  }
}

Server::~Server() = default;

void Server::replay() {
  const auto& dir = *options_.data_dir;
  for (const auto& e : Journal::read_all(dir / "grants.jsonl")) {
    directory_.bootstrap_grant(e.at("subject").get<std::string>(), e.at("grantee").get<std::string>());
  }
  for (const auto& e : Journal::read_all(dir / "records.jsonl")) {
    const auto op = e.at("op").get<std::string>();
    if (op == "ingest") {
      apply_ingest(frame_from_json(e.at("frame")));
    } else if (op == "threshold") {
      const auto ch = protocol::parse_channel(e.at("channel").get<std::string>());
      if (!ch) throw Error("corrupt journal: unknown channel");
      apply_threshold(e.at("subject").get<std::string>(),
                      protocol::Threshold{*ch, e.at("low").get<double>(), e.at("high").get<double>(),
                                          e.at("set_by").get<std::string>(), e.at("ts").get<protocol::Timestamp>()});
    } else if (op == "advice") {
      apply_advice(e.at("subject").get<std::string>(),
                   protocol::AdviceSms{e.at("ts").get<protocol::Timestamp>(), e.at("subject").get<std::string>(),
                                       e.at("doctor").get<std::string>(), e.at("text").get<std::string>()});
    }
  }
  for (const auto& e : Journal::read_all(dir / "knowledge.jsonl")) {
    const auto op = e.at("op").get<std::string>();
    if (op == "add") {
      knowledge_.add(directory_.require(e.at("author").get<std::string>()),
                     e.at("keywords").get<std::vector<std::string>>(), e.at("area").get<std::string>(),
                     e.at("body").get<std::string>());
    } else if (op == "evaluate") {
      knowledge_.evaluate(directory_.require(e.at("specialist").get<std::string>()),
                          e.at("entry").get<std::string>(), rating_from(e.at("rating").get<double>()));
    } else if (op == "feedback") {
      knowledge_.feedback(directory_.require(e.at("user").get<std::string>()), e.at("entry").get<std::string>(),
                          e.at("helpful").get<bool>() ? Verdict::Helpful : Verdict::Unhelpful);
    }
  }
  for (const auto& e : Journal::read_all(dir / "threads.jsonl")) {
    const auto op = e.at("op").get<std::string>();
    if (op == "open") {
      const auto p = e.at("participants").get<std::vector<std::string>>();
      threads_.open(e.at("thread").get<std::string>(), std::set<std::string>(p.begin(), p.end()));
    } else if (op == "post") {
      threads_.post(e.at("author").get<std::string>(), e.at("thread").get<std::string>(),
                    e.at("text").get<std::string>(), e.at("ts").get<protocol::Timestamp>());
    }
  }
}

void Server::set_sms_sink(SmsSink sink) {
  std::lock_guard lock(side_mutex_);
  sms_sink_ = std::move(sink);
}

std::optional<std::string> Server::authenticate(std::string_view token) const {
  std::shared_lock lock(mutex_);
  return directory_.authenticate(token);
}

UserAccount Server::user(std::string_view user_id) const {
  std::shared_lock lock(mutex_);
  return directory_.require(user_id);
}

std::vector<std::string> Server::visible_subjects(const std::string& viewer) const {
  std::shared_lock lock(mutex_);
  return directory_.visible_subjects(viewer);
}

void Server::audit(json entry) {
  std::lock_guard lock(side_mutex_);
  audit_.push_back(entry.dump());
}

std::vector<std::string> Server::audit_log() const {
  std::lock_guard lock(side_mutex_);
  return audit_;
}

void Server::publish(const std::string& subject, const std::vector<json>& events) {
  if (events.empty()) return;
  std::lock_guard lock(side_mutex_);
  for (const auto& [id, sub] : subscriptions_) {
    if (sub.subject != subject) continue;
    for (const auto& ev : events) sub.listener(ev);
  }
}

// --- ingest -----------------------------------------------------------------

IngestResult Server::apply_ingest(const protocol::BulkFrame& frame) {
  return records_.ingest(frame);
}

protocol::BulkAck Server::ingest_bulk(const protocol::BulkFrame& frame) {
  IngestResult result;
  {
    std::unique_lock lock(mutex_);
    const auto* subject = directory_.find(frame.elder_id);
    const bool foreign = std::any_of(frame.records.begin(), frame.records.end(),
                                     [&](const auto& r) { return r.elder_id != frame.elder_id; });
    if (subject == nullptr || subject->role != Role::Elderly || foreign || !protocol::is_well_ordered(frame)) {
      lock.unlock();
      audit(json{{"op", "ingest_rejected"}, {"frame", frame.frame_id}, {"elder_id", frame.elder_id}});
      return protocol::BulkAck{frame.frame_id, 0};
    }
    result = apply_ingest(frame);
    if (records_journal_ && (!result.inserted.empty() || !result.inserted_events.empty())) {
      protocol::BulkFrame fresh{frame.frame_id, frame.elder_id, result.inserted, result.inserted_events};
      records_journal_->append(json{{"op", "ingest"}, {"frame", frame_payload_json(fresh)}});
    }
  }
  audit(json{{"op", "ingest"}, {"frame", frame.frame_id}, {"elder_id", frame.elder_id},
             {"processed", result.processed}, {"inserted", result.inserted.size() + result.inserted_events.size()},
             {"duplicates", result.duplicates}});

  std::vector<json> live;
  for (const auto& r : result.inserted) live.push_back(json{{"type", "vital"}, {"record", protocol::record_to_json(r)}});
  for (const auto& e : result.inserted_events) {
    if (is_alarm_kind(e.kind)) live.push_back(json{{"type", "alarm"}, {"event", protocol::event_to_json(e)}});
  }
  publish(frame.elder_id, live);
  return protocol::BulkAck{frame.frame_id, result.processed};
}

protocol::Bytes Server::ingest_frame(std::span<const std::uint8_t> bytes) {
  try {
    return protocol::frame_ack(ingest_bulk(protocol::unframe_bulk(bytes)));
  } catch (const ProtocolError& e) {
    audit(json{{"op", "ingest_rejected"}, {"reason", e.what()}});
    return protocol::frame_ack(protocol::BulkAck{0, 0});
  }
}

// --- records ------------------------------------------------------------------

void Server::require_view(const std::string& viewer, const std::string& subject) const {
  if (!directory_.can_view(viewer, subject)) {
    throw AuthError("'" + viewer + "' is not authorised to view '" + subject + "'");
  }
}

std::vector<protocol::VitalRecord> Server::view_records(const std::string& viewer, const std::string& subject,
                                                        protocol::Timestamp since) const {
  std::shared_lock lock(mutex_);
  require_view(viewer, subject);
  return records_.records(subject, since);
}

std::map<protocol::VitalChannel, protocol::Threshold> Server::view_thresholds(const std::string& viewer,
                                                                              const std::string& subject) const {
  std::shared_lock lock(mutex_);
  require_view(viewer, subject);
  return records_.thresholds(subject);
}

std::vector<HistoryEvent> Server::view_alarms(const std::string& viewer, const std::string& subject) const {
  std::shared_lock lock(mutex_);
  require_view(viewer, subject);
  return records_.alarms(subject);
}

std::vector<HistoryEvent> Server::view_history(const std::string& viewer, const std::string& subject) const {
  std::shared_lock lock(mutex_);
  require_view(viewer, subject);
  return records_.history(subject);
}

void Server::grant(const std::string& actor, const std::string& subject, const std::string& grantee) {
  {
    std::unique_lock lock(mutex_);
    directory_.grant(actor, subject, grantee);
    if (grants_journal_) grants_journal_->append(json{{"op", "grant"}, {"subject", subject}, {"grantee", grantee}});
  }
  audit(json{{"op", "grant"}, {"subject", subject}, {"grantee", grantee}});
}

// --- doctor actions -----------------------------------------------------------

const UserAccount& Server::require_doctor_for(const std::string& doctor, const std::string& subject) const {
  const auto* d = directory_.find(doctor);
  if (d == nullptr || d->role != Role::Doctor) throw AuthError("'" + doctor + "' is not a doctor");
  if (!directory_.is_assigned(doctor, subject)) {
    throw AuthError("doctor '" + doctor + "' is not assigned to '" + subject + "'");
  }
  return *d;
}

void Server::apply_threshold(const std::string& subject, const protocol::Threshold& t) {
  records_.set_threshold(subject, t);
  char band[96];
  std::snprintf(band, sizeof band, "%s [%g, %g]", std::string(protocol::to_string(t.channel)).c_str(), t.low, t.high);
  records_.append_history(subject, HistoryEvent{t.ts, "threshold_set", band, t.set_by});
}

void Server::apply_advice(const std::string& subject, const protocol::AdviceSms& advice) {
  records_.append_history(subject, HistoryEvent{advice.ts, "advice_sent", advice.text, advice.doctor_id});
}

protocol::ThresholdSms Server::set_threshold(const std::string& doctor, const std::string& subject,
                                             protocol::VitalChannel channel, double low, double high,
                                             protocol::Timestamp now) {
  protocol::ThresholdSms msg{now, subject, channel, low, high, doctor};
  std::string line;
  {
    std::unique_lock lock(mutex_);
    require_doctor_for(doctor, subject);
    protocol::validate_band(low, high);
    line = protocol::encode_sms(msg);
    const auto t = msg.to_threshold();
    apply_threshold(subject, t);
    if (records_journal_) {
      records_journal_->append(json{{"op", "threshold"}, {"subject", subject},
                                    {"channel", protocol::to_string(channel)}, {"low", low}, {"high", high},
                                    {"set_by", doctor}, {"ts", now}});
    }
  }
  audit(json{{"op", "set_threshold"}, {"doctor", doctor}, {"subject", subject}, {"sms", line}});
  publish(subject, {json{{"type", "threshold"}, {"threshold", protocol::threshold_to_json(msg.to_threshold())}}});
  std::lock_guard lock(side_mutex_);
  if (sms_sink_) sms_sink_(subject, line);
  return msg;
}

protocol::AdviceSms Server::send_advice(const std::string& doctor, const std::string& subject, std::string text,
                                        protocol::Timestamp now) {
  protocol::AdviceSms msg{now, subject, doctor, std::move(text)};
  std::string line;
  {
    std::unique_lock lock(mutex_);
    require_doctor_for(doctor, subject);
    if (msg.text.empty()) throw ValidationError("advice text must not be empty");
    try {
      line = protocol::encode_sms(msg);
    } catch (const ProtocolError& e) {
      throw ValidationError(e.what());
    }
    apply_advice(subject, msg);
    if (records_journal_) {
      records_journal_->append(json{{"op", "advice"}, {"subject", subject}, {"doctor", doctor},
                                    {"text", msg.text}, {"ts", now}});
    }
  }
  audit(json{{"op", "send_advice"}, {"doctor", doctor}, {"subject", subject}, {"sms", line}});
  publish(subject, {json{{"type", "advice"}, {"advice", {{"doctor", doctor}, {"text", msg.text}, {"ts", now}}}}});
  std::lock_guard lock(side_mutex_);
  if (sms_sink_) sms_sink_(subject, line);
  return msg;
}

// --- threads ------------------------------------------------------------------

MessageThread Server::open_thread(const std::string& creator, std::vector<std::string> participants,
                                  std::string thread_id) {
  std::unique_lock lock(mutex_);
  directory_.require(creator);
  std::set<std::string> members(participants.begin(), participants.end());
  members.insert(creator);
  for (const auto& m : members) directory_.require(m);
  const auto& t = threads_.open(std::move(thread_id), std::move(members));
  if (threads_journal_) {
    threads_journal_->append(json{{"op", "open"}, {"thread", t.thread_id},
                                  {"participants", std::vector<std::string>(t.participants.begin(), t.participants.end())}});
  }
  return t;
}

MessageThread Server::post_message(const std::string& author, const std::string& thread_id, std::string text,
                                   protocol::Timestamp now) {
  std::unique_lock lock(mutex_);
  const auto& t = threads_.post(author, thread_id, text, now);
  if (threads_journal_) {
    threads_journal_->append(json{{"op", "post"}, {"thread", thread_id}, {"author", author}, {"text", text}, {"ts", now}});
  }
  return t;
}

MessageThread Server::read_thread(const std::string& user, const std::string& thread_id) const {
  std::shared_lock lock(mutex_);
  return threads_.read(user, thread_id);
}

// --- knowledge ------------------------------------------------------------------

KnowledgeEntry Server::add_knowledge(const std::string& specialist, std::vector<std::string> keywords,
                                     std::string area, std::string body) {
  std::unique_lock lock(mutex_);
  const auto& e = knowledge_.add(directory_.require(specialist), std::move(keywords), std::move(area), std::move(body));
  if (knowledge_journal_) {
    knowledge_journal_->append(json{{"op", "add"}, {"author", specialist}, {"keywords", e.keywords},
                                    {"area", e.area}, {"body", e.body}});
  }
  return e;
}

KnowledgeEntry Server::evaluate_knowledge(const std::string& specialist, const std::string& entry_id,
                                          double rating) {
  std::unique_lock lock(mutex_);
  const auto& e = knowledge_.evaluate(directory_.require(specialist), entry_id, rating_from(rating));
  if (knowledge_journal_) {
    knowledge_journal_->append(json{{"op", "evaluate"}, {"specialist", specialist}, {"entry", entry_id}, {"rating", rating}});
  }
  return e;
}

KnowledgeEntry Server::record_feedback(const std::string& user, const std::string& entry_id, Verdict verdict) {
  std::unique_lock lock(mutex_);
  const auto& e = knowledge_.feedback(directory_.require(user), entry_id, verdict);
  if (knowledge_journal_) {
    knowledge_journal_->append(json{{"op", "feedback"}, {"user", user}, {"entry", entry_id},
                                    {"helpful", verdict == Verdict::Helpful}});
  }
  return e;
}

std::vector<KnowledgeEntry> Server::query_knowledge(const std::string& keyword, const std::string& area,
                                                    ConfidenceLevel min_level) const {
  std::shared_lock lock(mutex_);
  return knowledge_.query(keyword, area, min_level);
}

// --- live -----------------------------------------------------------------------

std::uint64_t Server::subscribe(const std::string& viewer, const std::string& subject, LiveListener listener) {
  {
    std::shared_lock lock(mutex_);
    require_view(viewer, subject);
  }
  std::lock_guard lock(side_mutex_);
  const auto id = next_subscription_++;
  subscriptions_.emplace(id, Subscription{subject, std::move(listener)});
  return id;
}

void Server::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(side_mutex_);
  subscriptions_.erase(id);
}

std::size_t Server::record_count(const std::string& subject) const {
  std::shared_lock lock(mutex_);
  return records_.record_count(subject);
}

std::set<HealthRecordStore::RecordKey> Server::record_keys(const std::string& subject) const {
  std::shared_lock lock(mutex_);
  return records_.record_keys(subject);
}

}  // namespace icare::server
