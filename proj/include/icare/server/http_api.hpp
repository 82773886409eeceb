// SPDX-License-Identifier: Apache-2.0
#pragma once

// HTTP+JSON routes over a Server. Transport-free: handle() takes a parsed
// request, so the routes are testable without sockets.
//
// Status mapping: 401 missing/unknown token, 403 AuthError, 404 NotFound or
// unknown route, 405 known path with the wrong method, 400 validation/parse
// errors and malformed bodies.

#include <functional>

#include <json.hpp>

#include "icare/net/http_server.hpp"
#include "icare/net/http_types.hpp"
#include "icare/protocol/types.hpp"
#include "icare/server/server.hpp"

namespace icare::server {

using Clock = std::function<protocol::Timestamp()>;

nlohmann::json history_to_json(const HistoryEvent& e);
nlohmann::json knowledge_to_json(const KnowledgeEntry& e);
nlohmann::json thread_to_json(const MessageThread& t);

class HttpApi {
 public:
  HttpApi(Server& server, Clock clock);

  net::HttpResponse handle(const net::HttpRequest& req) const;

  /// WS /subjects/{id}/live. The token may come from the Authorization header
  /// or a `token` query parameter (browsers cannot set headers on upgrades).
  net::WsRoute live_route() const;

 private:
  Server& server_;
  Clock clock_;
};

}  // namespace icare::server
