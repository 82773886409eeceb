// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icare/protocol/types.hpp"

namespace icare::server {

struct ThreadMessage {
  std::string author;
  protocol::Timestamp ts = 0;
  std::string text;
};

struct MessageThread {
  std::string thread_id;
  std::set<std::string> participants;
  std::vector<ThreadMessage> messages;  // append order
};

/// Communication platform between elders, their family and doctors. Only
/// participants may read or append. Not synchronised; the Server guards it.
class ThreadBoard {
 public:
  /// An empty id picks the next "T<n>". Throws ValidationError on reuse.
  const MessageThread& open(std::string thread_id, std::set<std::string> participants);
  const MessageThread& post(const std::string& author, std::string_view thread_id, std::string text,
                            protocol::Timestamp ts);
  const MessageThread& read(const std::string& user, std::string_view thread_id) const;
  std::vector<std::string> threads_for(const std::string& user) const;

 private:
  const MessageThread& require(std::string_view thread_id) const;

  std::map<std::string, MessageThread, std::less<>> threads_;
  std::uint64_t next_id_ = 1;
};

}  // namespace icare::server
