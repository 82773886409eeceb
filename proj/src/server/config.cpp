// SPDX-License-Identifier: Apache-2.0
#include "icare/server/config.hpp"

#include "icare/common/errors.hpp"

namespace icare::server {

Directory build_directory(const DirectorySeed& seed) {
  Directory dir;
  for (const auto& u : seed.users) dir.add_user(u);
  for (const auto& [doctor, subject] : seed.assignments) dir.assign(doctor, subject);
  for (const auto& [subject, grantee] : seed.grants) dir.bootstrap_grant(subject, grantee);
  return dir;
}

DirectorySeed parse_directory_seed(const TextDocument& doc) {
  DirectorySeed seed;
  if (const auto* users = doc.first("users")) {
    for (const auto* row : users->rows()) {
      const auto t = split_ws_rest(row->value, 3);
      if (t.size() < 3) throw ParseError(row->line, "user row is '<id> <role> <token> [name]'");
      const auto role = parse_role(t[1]);
      if (!role) throw ParseError(row->line, "unknown role '" + t[1] + "'");
      seed.users.push_back(UserAccount{t[0], *role, t.size() > 3 ? t[3] : t[0], t[2]});
    }
  }
  for (auto [name, target] : {std::pair{"assignments", &seed.assignments}, std::pair{"grants", &seed.grants}}) {
    if (const auto* s = doc.first(name)) {
      for (const auto* row : s->rows()) {
        const auto t = split_ws(row->value);
        if (t.size() != 2) throw ParseError(row->line, std::string(name) + " row takes two ids");
        target->emplace_back(t[0], t[1]);
      }
    }
  }
  return seed;
}

ServerConfig parse_server_config(const TextDocument& doc) {
  ServerConfig cfg;
  for (const auto& e : doc.root().entries) {
    if (e.key.empty()) throw ParseError(e.line, "expected key = value");
    if (e.key == "listen_http") {
      cfg.listen_http = e.value;
    } else if (e.key == "listen_bulk") {
      cfg.listen_bulk = e.value;
    } else if (e.key == "data_dir") {
      cfg.data_dir = e.value;
    } else if (e.key.rfind("sms_route.", 0) == 0) {
      cfg.sms_routes[e.key.substr(10)] = e.value;
    } else {
      throw ParseError(e.line, "unknown key '" + e.key + "'");
    }
  }
  cfg.directory = parse_directory_seed(doc);
  return cfg;
}

ServerConfig load_server_config(const std::string& path) { return parse_server_config(load_text_document(path)); }

}  // namespace icare::server
