// SPDX-License-Identifier: Apache-2.0
#pragma once

// Server config file:
//
//   listen_http = 127.0.0.1:8080
//   listen_bulk = 127.0.0.1:9000
//   data_dir = ./data                (optional; journals live here)
//   sms_route.E01 = 127.0.0.1:9100   (where THRESH/ADVICE lines for E01 go)
//
//   [users]        rows: <id> <role> <token> [display name]
//   [assignments]  rows: <doctor> <subject>
//   [grants]       rows: <subject> <grantee>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icare/common/text_document.hpp"
#include "icare/server/directory.hpp"

namespace icare::server {

struct DirectorySeed {
  std::vector<UserAccount> users;
  std::vector<std::pair<std::string, std::string>> assignments;  // (doctor, subject)
  std::vector<std::pair<std::string, std::string>> grants;       // (subject, grantee)
};

/// Throws ValidationError on unknown ids, bad roles or rule violations.
Directory build_directory(const DirectorySeed& seed);

/// Reads [users], [assignments] and [grants]. Throws ParseError.
DirectorySeed parse_directory_seed(const TextDocument& doc);

struct ServerConfig {
  std::string listen_http = "127.0.0.1:8080";
  std::string listen_bulk = "127.0.0.1:9000";
  std::optional<std::string> data_dir;
  std::map<std::string, std::string> sms_routes;  // elder id -> host:port
  DirectorySeed directory;
};

ServerConfig parse_server_config(const TextDocument& doc);
ServerConfig load_server_config(const std::string& path);

}  // namespace icare::server
