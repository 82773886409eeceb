// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "icare/protocol/bulk.hpp"
#include "icare/protocol/sms.hpp"
#include "icare/server/directory.hpp"
#include "icare/server/journal.hpp"
#include "icare/server/knowledge.hpp"
#include "icare/server/record_store.hpp"
#include "icare/server/threads.hpp"

namespace icare::server {

struct ServerOptions {
  /// When set, every store keeps an append-only journal here and is rebuilt
  /// from it on construction.
  std::optional<std::filesystem::path> data_dir;
};

/// Receives THRESH / ADVICE lines addressed to a subject's gateway.
using SmsSink = std::function<void(const std::string& elder_id, const std::string& line)>;

/// Live push for one subject: {"type": "vital"|"alarm"|"threshold", ...}.
using LiveListener = std::function<void(const nlohmann::json& event)>;

/// Personal health information system plus medical guidance.
///
/// Thread-safe. Mutations take an exclusive lock over the domain state and are
/// journaled inside it, so every operation is linearizable and readers see a
/// consistent snapshot. Live listeners run after the lock is released.
class Server {
 public:
  explicit Server(Directory directory, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void set_sms_sink(SmsSink sink);

  std::optional<std::string> authenticate(std::string_view token) const;
  UserAccount user(std::string_view user_id) const;
  std::vector<std::string> visible_subjects(const std::string& viewer) const;

  // --- bulk ingest -------------------------------------------------------
  /// Malformed frames (unknown subject, foreign records) insert nothing and
  /// ack 0. Otherwise the ack counts every record processed, duplicates too.
  protocol::BulkAck ingest_bulk(const protocol::BulkFrame& frame);
  /// Wire entry point: returns the encoded ack frame.
  protocol::Bytes ingest_frame(std::span<const std::uint8_t> bytes);

  // --- health records (AuthError when the viewer may not see the subject) --
  std::vector<protocol::VitalRecord> view_records(const std::string& viewer, const std::string& subject,
                                                  protocol::Timestamp since = 0) const;
  std::map<protocol::VitalChannel, protocol::Threshold> view_thresholds(const std::string& viewer,
                                                                        const std::string& subject) const;
  std::vector<HistoryEvent> view_alarms(const std::string& viewer, const std::string& subject) const;
  std::vector<HistoryEvent> view_history(const std::string& viewer, const std::string& subject) const;

  void grant(const std::string& actor, const std::string& subject, const std::string& grantee);

  // --- doctor actions, delivered to the gateway as SMS --------------------
  protocol::ThresholdSms set_threshold(const std::string& doctor, const std::string& subject,
                                       protocol::VitalChannel channel, double low, double high,
                                       protocol::Timestamp now);
  protocol::AdviceSms send_advice(const std::string& doctor, const std::string& subject, std::string text,
                                  protocol::Timestamp now);

  // --- communication platform --------------------------------------------
  MessageThread open_thread(const std::string& creator, std::vector<std::string> participants,
                            std::string thread_id = {});
  MessageThread post_message(const std::string& author, const std::string& thread_id, std::string text,
                             protocol::Timestamp now);
  MessageThread read_thread(const std::string& user, const std::string& thread_id) const;

  // --- knowledge base ----------------------------------------------------
  KnowledgeEntry add_knowledge(const std::string& specialist, std::vector<std::string> keywords,
                               std::string area, std::string body);
  KnowledgeEntry evaluate_knowledge(const std::string& specialist, const std::string& entry_id, double rating);
  KnowledgeEntry record_feedback(const std::string& user, const std::string& entry_id, Verdict verdict);
  std::vector<KnowledgeEntry> query_knowledge(const std::string& keyword, const std::string& area,
                                              ConfidenceLevel min_level = ConfidenceLevel::General) const;

  // --- live feed -----------------------------------------------------------
  std::uint64_t subscribe(const std::string& viewer, const std::string& subject, LiveListener listener);
  void unsubscribe(std::uint64_t id);

  // --- inspection (harness and tests) -------------------------------------
  std::size_t record_count(const std::string& subject) const;
  std::set<HealthRecordStore::RecordKey> record_keys(const std::string& subject) const;
  std::vector<std::string> audit_log() const;

 private:
  struct Subscription {
    std::string subject;
    LiveListener listener;
  };

  void require_view(const std::string& viewer, const std::string& subject) const;
  const UserAccount& require_doctor_for(const std::string& doctor, const std::string& subject) const;
  void audit(nlohmann::json entry);
  void publish(const std::string& subject, const std::vector<nlohmann::json>& events);
  void replay();

  // apply_* mutate without auth checks; callers hold the write lock.
  IngestResult apply_ingest(const protocol::BulkFrame& frame);
  void apply_threshold(const std::string& subject, const protocol::Threshold& t);
  void apply_advice(const std::string& subject, const protocol::AdviceSms& advice);

  mutable std::shared_mutex mutex_;
  Directory directory_;
  HealthRecordStore records_;
  KnowledgeBase knowledge_;
  ThreadBoard threads_;
  std::unique_ptr<Journal> records_journal_;
  std::unique_ptr<Journal> knowledge_journal_;
  std::unique_ptr<Journal> threads_journal_;
  std::unique_ptr<Journal> grants_journal_;
  ServerOptions options_;

  mutable std::mutex side_mutex_;  // sms sink, audit log, subscriptions
  SmsSink sms_sink_;
  std::vector<std::string> audit_;
  std::map<std::uint64_t, Subscription> subscriptions_;
  std::uint64_t next_subscription_ = 1;
};

}  // namespace icare::server
