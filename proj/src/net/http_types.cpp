// SPDX-License-Identifier: Apache-2.0
#include "icare/net/http_types.hpp"

namespace icare::net {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string url_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 && hex_value(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string HttpRequest::bearer_token() const {
  constexpr std::string_view prefix = "Bearer ";
  if (authorization.size() > prefix.size() && authorization.compare(0, prefix.size(), prefix) == 0) {
    return authorization.substr(prefix.size());
  }
  return {};
}

std::string HttpRequest::query_or(const std::string& key, std::string fallback) const {
  const auto it = query.find(key);
  return it == query.end() ? fallback : it->second;
}

HttpRequest HttpRequest::from_target(std::string method, std::string_view target, std::string body,
                                     std::string authorization) {
  HttpRequest req;
  req.method = std::move(method);
  req.body = std::move(body);
  req.authorization = std::move(authorization);
  const auto q = target.find('?');
  req.path = url_decode(target.substr(0, q));
  if (q != std::string_view::npos) {
    auto rest = target.substr(q + 1);
    while (!rest.empty()) {
      const auto amp = rest.find('&');
      const auto pair = rest.substr(0, amp);
      const auto eq = pair.find('=');
      if (!pair.empty()) {
        req.query[url_decode(pair.substr(0, eq))] =
            eq == std::string_view::npos ? std::string{} : url_decode(pair.substr(eq + 1));
      }
      if (amp == std::string_view::npos) break;
      rest.remove_prefix(amp + 1);
    }
  }
  return req;
}

}  // namespace icare::net
