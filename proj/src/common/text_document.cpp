// SPDX-License-Identifier: Apache-2.0
#include "icare/common/text_document.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "icare/common/errors.hpp"

namespace icare {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> split_ws_rest(std::string_view s, std::size_t n) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (out.size() < n && i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    out.emplace_back(s.substr(start, i - start));
  }
  const auto rest = trim(i < s.size() ? s.substr(i) : std::string_view{});
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "expected integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "expected number, got '" + std::string(s) + "'");
  }
  return v;
}

const TextEntry* TextSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (!e.key.empty() && e.key == key) return &e;
  }
  return nullptr;
}

std::vector<const TextEntry*> TextSection::rows() const {
  std::vector<const TextEntry*> out;
  for (const auto& e : entries) {
    if (e.key.empty()) out.push_back(&e);
  }
  return out;
}

std::optional<std::string> TextSection::get(std::string_view key) const {
  if (const auto* e = find(key)) return e->value;
  return std::nullopt;
}

std::string TextSection::require(std::string_view key) const {
  if (const auto* e = find(key)) return e->value;
  throw ParseError(line, "missing key '" + std::string(key) + "'" +
                             (name.empty() ? std::string{} : " in [" + name + "]"));
}

std::int64_t TextSection::get_int(std::string_view key, std::int64_t fallback) const {
  if (const auto* e = find(key)) return parse_int(e->value, e->line);
  return fallback;
}

std::int64_t TextSection::require_int(std::string_view key) const {
  require(key);
  return parse_int(find(key)->value, find(key)->line);
}

double TextSection::require_double(std::string_view key) const {
  require(key);
  return parse_double(find(key)->value, find(key)->line);
}

std::vector<const TextSection*> TextDocument::all(std::string_view name) const {
  std::vector<const TextSection*> out;
  for (const auto& s : sections) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

const TextSection* TextDocument::first(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

TextDocument parse_text_document(std::string_view text) {
  TextDocument doc;
  doc.sections.emplace_back();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      const auto header = split_ws_rest(line.substr(1, line.size() - 2), 1);
      if (header.empty()) throw ParseError(line_no, "empty section name");
      TextSection section;
      section.line = line_no;
      section.name = header[0];
      if (header.size() > 1) section.arg = header[1];
      doc.sections.push_back(std::move(section));
      continue;
    }

    TextEntry entry;
    entry.line = line_no;
    const auto eq = line.find('=');
    // A '=' only makes a key/value entry when the key is a single token.
    if (eq != std::string_view::npos && eq > 0 &&
        trim(line.substr(0, eq)).find_first_of(" \t") == std::string_view::npos) {
      entry.key = std::string(trim(line.substr(0, eq)));
      entry.value = std::string(trim(line.substr(eq + 1)));
      if (doc.sections.back().find(entry.key) != nullptr) {
        throw ParseError(line_no, "duplicate key '" + entry.key + "'");
      }
    } else {
      entry.value = std::string(line);
    }
    doc.sections.back().entries.push_back(std::move(entry));
  }
  return doc;
}

TextDocument load_text_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text_document(ss.str());
}

}  // namespace icare
