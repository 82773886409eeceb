// SPDX-License-Identifier: Apache-2.0
#include "icare/server/http_api.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>

#include "icare/common/errors.hpp"
#include "icare/protocol/json.hpp"
#include "icare/protocol/sms.hpp"

namespace icare::server {

using json = nlohmann::json;
using net::HttpRequest;
using net::HttpResponse;

json history_to_json(const HistoryEvent& e) {
  return json{{"ts", e.ts}, {"kind", e.kind}, {"detail", e.detail}, {"source", e.source}};
}

json knowledge_to_json(const KnowledgeEntry& e) {
  json evals = json::object();
  for (const auto& [who, r] : e.evaluations) evals[who] = rating_value(r);
  return json{{"entry_id", e.entry_id}, {"keywords", e.keywords}, {"area", e.area},
              {"body", e.body}, {"author", e.author}, {"score", e.score},
              {"level", to_string(e.level)}, {"evaluations", evals}, {"feedback_delta", e.feedback_delta()}};
}

json thread_to_json(const MessageThread& t) {
  json msgs = json::array();
  for (const auto& m : t.messages) msgs.push_back(json{{"author", m.author}, {"ts", m.ts}, {"text", m.text}});
  return json{{"thread_id", t.thread_id},
              {"participants", std::vector<std::string>(t.participants.begin(), t.participants.end())},
              {"messages", msgs}};
}

namespace {

HttpResponse reply(int status, const json& body) { return HttpResponse{status, body.dump()}; }
HttpResponse error(int status, const std::string& what) { return reply(status, json{{"error", what}}); }

struct MethodNotAllowed {};

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

json parse_body(const HttpRequest& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body);  // json::parse_error -> 400
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

template <typename T>
T field(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end()) throw ValidationError(std::string("missing field '") + name + "'");
  return it->get<T>();
}

protocol::Timestamp parse_since(const HttpRequest& req) {
  const auto s = req.query_or("since", "0");
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used != s.size()) throw ValidationError("bad since");
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("since must be an integer timestamp");
  }
}

}  // namespace

HttpApi::HttpApi(Server& server, Clock clock) : server_(server), clock_(std::move(clock)) {}

HttpResponse HttpApi::handle(const HttpRequest& req) const {
  const auto user = server_.authenticate(req.bearer_token());
  try {
    const auto p = split_path(req.path);
    const auto& m = req.method;
    auto only = [&](const char* method) {
      if (m != method) throw MethodNotAllowed{};
    };
    if (p.empty()) return error(404, "no route");
    if (!user) return error(401, "missing or unknown bearer token");
    const auto& me = *user;

    if (p.size() == 1 && p[0] == "me") {
      only("GET");
      const auto acct = server_.user(me);
      return reply(200, json{{"user_id", acct.user_id}, {"role", to_string(acct.role)},
                             {"display_name", acct.display_name}});
    }

    if (p[0] == "subjects") {
      if (p.size() == 1) {
        only("GET");
        return reply(200, json{{"subjects", server_.visible_subjects(me)}});
      }
      const auto& subject = p[1];
      if (p.size() == 3 && p[2] == "vitals") {
        only("GET");
        const auto since = parse_since(req);
        json records = json::array();
        for (const auto& r : server_.view_records(me, subject, since)) records.push_back(protocol::record_to_json(r));
        json thresholds = json::object();
        for (const auto& [ch, t] : server_.view_thresholds(me, subject)) {
          thresholds[std::string(protocol::to_string(ch))] = protocol::threshold_to_json(t);
        }
        return reply(200, json{{"subject", subject}, {"records", records}, {"thresholds", thresholds}});
      }
      if (p.size() == 3 && (p[2] == "alarms" || p[2] == "history")) {
        only("GET");
        const auto events = p[2] == "alarms" ? server_.view_alarms(me, subject) : server_.view_history(me, subject);
        json out = json::array();
        for (const auto& e : events) out.push_back(history_to_json(e));
        return reply(200, json{{"subject", subject}, {p[2], out}});
      }
      if (p.size() == 4 && p[2] == "thresholds") {
        only("PUT");
        const auto channel = protocol::parse_channel(p[3]);
        if (!channel) throw ValidationError("unknown channel '" + p[3] + "'");
        const auto body = parse_body(req);
        const auto sms = server_.set_threshold(me, subject, *channel, field<double>(body, "low"),
                                               field<double>(body, "high"), clock_());
        return reply(200, json{{"threshold", protocol::threshold_to_json(sms.to_threshold())},
                               {"sms", protocol::encode_sms(sms)}});
      }
      if (p.size() == 3 && p[2] == "advice") {
        only("POST");
        const auto body = parse_body(req);
        const auto sms = server_.send_advice(me, subject, field<std::string>(body, "text"), clock_());
        return reply(200, json{{"sms", protocol::encode_sms(sms)}});
      }
      if (p.size() == 3 && p[2] == "grants") {
        only("POST");
        const auto body = parse_body(req);
        const auto grantee = field<std::string>(body, "grantee");
        server_.grant(me, subject, grantee);
        return reply(200, json{{"subject", subject}, {"grantee", grantee}, {"level", "view"}});
      }
    }

    if (p[0] == "knowledge") {
      if (p.size() == 1 && m == "GET") {
        const auto keyword = req.query_or("keyword");
        if (keyword.empty()) throw ValidationError("keyword is required");
        const auto level_name = req.query_or("min_level", "general");
        const auto level = parse_level(level_name);
        if (!level) throw ValidationError("unknown level '" + level_name + "'");
        json out = json::array();
        for (const auto& e : server_.query_knowledge(keyword, req.query_or("area"), *level)) {
          out.push_back(knowledge_to_json(e));
        }
        return reply(200, json{{"entries", out}});
      }
      if (p.size() == 1) {
        only("POST");
        const auto body = parse_body(req);
        const auto e = server_.add_knowledge(me, field<std::vector<std::string>>(body, "keywords"),
                                             body.value("area", std::string()), field<std::string>(body, "body"));
        return reply(201, knowledge_to_json(e));
      }
      if (p.size() == 3 && p[2] == "evaluate") {
        only("POST");
        const auto body = parse_body(req);
        return reply(200, knowledge_to_json(server_.evaluate_knowledge(me, p[1], field<double>(body, "rating"))));
      }
      if (p.size() == 3 && p[2] == "feedback") {
        only("POST");
        const auto body = parse_body(req);
        const auto v = field<std::string>(body, "verdict");
        if (v != "helpful" && v != "unhelpful") throw ValidationError("verdict must be helpful or unhelpful");
        return reply(200, knowledge_to_json(server_.record_feedback(
                              me, p[1], v == "helpful" ? Verdict::Helpful : Verdict::Unhelpful)));
      }
    }

    if (p[0] == "threads") {
      if (p.size() == 1) {
        only("POST");
        const auto body = parse_body(req);
        const auto t = server_.open_thread(me, field<std::vector<std::string>>(body, "participants"),
                                           body.value("thread_id", std::string()));
        return reply(201, thread_to_json(t));
      }
      if (p.size() == 2) {
        only("GET");
        return reply(200, thread_to_json(server_.read_thread(me, p[1])));
      }
      if (p.size() == 3 && p[2] == "messages") {
        only("POST");
        const auto body = parse_body(req);
        return reply(200, thread_to_json(server_.post_message(me, p[1], field<std::string>(body, "text"), clock_())));
      }
    }
    return error(404, "no route for " + req.path);
  } catch (const MethodNotAllowed&) {
    return error(405, req.method + " not allowed on " + req.path);
  } catch (const AuthError& e) {
    return error(403, e.what());
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const ValidationError& e) {
    return error(400, e.what());
  } catch (const ParseError& e) {
    return error(400, e.what());
  } catch (const ProtocolError& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("bad request body: ") + e.what());
  }
}

net::WsRoute HttpApi::live_route() const {
  auto subject_of = [](const HttpRequest& req) -> std::optional<std::string> {
    const auto p = split_path(req.path);
    if (p.size() == 3 && p[0] == "subjects" && p[2] == "live") return p[1];
    return std::nullopt;
  };
  auto viewer_of = [this](const HttpRequest& req) {
    auto token = req.bearer_token();
    if (token.empty()) token = req.query_or("token");
    return server_.authenticate(token);
  };

  net::WsRoute route;
  route.authorize = [this, subject_of, viewer_of](const HttpRequest& req) -> std::optional<HttpResponse> {
    const auto subject = subject_of(req);
    if (!subject) return error(404, "no websocket route for " + req.path);
    const auto viewer = viewer_of(req);
    if (!viewer) return error(401, "missing or unknown bearer token");
    try {
      server_.view_thresholds(*viewer, *subject);  // cheap access probe
    } catch (const AuthError& e) {
      return error(403, e.what());
    } catch (const NotFound& e) {
      return error(404, e.what());
    }
    return std::nullopt;
  };
  route.run = [this, subject_of, viewer_of](const HttpRequest& req, net::WsChannel& channel) {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> queue;
    std::uint64_t id = 0;
    try {
      id = server_.subscribe(*viewer_of(req), *subject_of(req), [&](const json& event) {
        {
          std::lock_guard lock(mu);
          queue.push_back(event.dump());
        }
        cv.notify_one();
      });
    } catch (const Error&) {
      return;
    }
    while (channel.open()) {
      std::unique_lock lock(mu);
      cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return !queue.empty(); });
      auto batch = std::move(queue);
      queue.clear();
      lock.unlock();
      bool ok = true;
      for (const auto& msg : batch) {
        if (!(ok = channel.send(msg))) break;
      }
      if (!ok) break;
    }
    server_.unsubscribe(id);
  };
  return route;
}

}  // namespace icare::server
