// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

namespace icare::net {

struct HttpRequest {
  std::string method;  // "GET", "PUT", ...
  std::string path;    // decoded, without query
  std::map<std::string, std::string> query;
  std::string body;
  std::string authorization;  // raw Authorization header

  /// Token from "Bearer <token>", or empty.
  std::string bearer_token() const;
  std::string query_or(const std::string& key, std::string fallback = {}) const;

  /// Splits "/a/b?x=1&y=%20" into path and decoded query parameters.
  static HttpRequest from_target(std::string method, std::string_view target, std::string body = {},
                                 std::string authorization = {});
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

std::string url_decode(std::string_view s);

}  // namespace icare::net
