// SPDX-License-Identifier: Apache-2.0
#pragma once

// Human-editable structured text used by gateway configs, server configs and
// scenario files.
//
//   # comment
//   key = value              (entries before any section land in the root)
//   [section optional-arg]
//   key = value
//   free row of tokens       (a table row: any line without '=')
//
// Rows keep their raw text so consumers can treat a trailing field as free
// text. Every entry remembers its source line for error reporting.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace icare {

struct TextEntry {
  std::size_t line = 0;
  std::string key;    // empty for table rows
  std::string value;  // value for key/value entries, raw text for rows
};

struct TextSection {
  std::size_t line = 0;
  std::string name;  // empty for the root section
  std::string arg;
  std::vector<TextEntry> entries;

  const TextEntry* find(std::string_view key) const;
  std::vector<const TextEntry*> rows() const;

  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  std::int64_t require_int(std::string_view key) const;
  double require_double(std::string_view key) const;
};

struct TextDocument {
  std::vector<TextSection> sections;  // sections[0] is always the root

  const TextSection& root() const { return sections.front(); }
  std::vector<const TextSection*> all(std::string_view name) const;
  const TextSection* first(std::string_view name) const;
};

TextDocument parse_text_document(std::string_view text);
TextDocument load_text_document(const std::string& path);

// Helpers shared by the document consumers. All throw ParseError(line, ...).
std::string_view trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
/// Splits off the first `n` whitespace tokens; the remainder (trimmed) is
/// appended as element n when non-empty.
std::vector<std::string> split_ws_rest(std::string_view s, std::size_t n);
std::int64_t parse_int(std::string_view s, std::size_t line);
double parse_double(std::string_view s, std::size_t line);

}  // namespace icare
