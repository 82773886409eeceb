// SPDX-License-Identifier: Apache-2.0
#include "icare/server/threads.hpp"

#include "icare/common/errors.hpp"

namespace icare::server {

const MessageThread& ThreadBoard::open(std::string thread_id, std::set<std::string> participants) {
  if (thread_id.empty()) {
    do {
      thread_id = "T" + std::to_string(next_id_++);
    } while (threads_.contains(thread_id));
  }
  if (!protocol::is_valid_id(thread_id)) throw ValidationError("invalid thread id '" + thread_id + "'");
  if (threads_.contains(thread_id)) throw ValidationError("thread '" + thread_id + "' already exists");
  if (participants.size() < 2) throw ValidationError("a thread needs at least two participants");
  auto& t = threads_[thread_id];
  t.thread_id = thread_id;
  t.participants = std::move(participants);
  return t;
}

const MessageThread& ThreadBoard::require(std::string_view thread_id) const {
  const auto it = threads_.find(thread_id);
  if (it == threads_.end()) throw NotFound("unknown thread '" + std::string(thread_id) + "'");
  return it->second;
}

const MessageThread& ThreadBoard::post(const std::string& author, std::string_view thread_id, std::string text,
                                       protocol::Timestamp ts) {
  const auto it = threads_.find(thread_id);
  if (it == threads_.end()) throw NotFound("unknown thread '" + std::string(thread_id) + "'");
  auto& t = it->second;
  if (!t.participants.contains(author)) throw AuthError("'" + author + "' is not a participant");
  if (text.empty()) throw ValidationError("message text must not be empty");
  t.messages.push_back(ThreadMessage{author, ts, std::move(text)});
  return t;
}

const MessageThread& ThreadBoard::read(const std::string& user, std::string_view thread_id) const {
  const auto& t = require(thread_id);
  if (!t.participants.contains(user)) throw AuthError("'" + user + "' is not a participant");
  return t;
}

std::vector<std::string> ThreadBoard::threads_for(const std::string& user) const {
  std::vector<std::string> out;
  for (const auto& [id, t] : threads_) {
    if (t.participants.contains(user)) out.push_back(id);
  }
  return out;
}

}  // namespace icare::server
