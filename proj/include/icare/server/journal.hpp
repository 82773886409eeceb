// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace icare::server {

/// Append-only JSON-lines journal. Each append is flushed before returning.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);

  void append(const nlohmann::json& entry);
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Every entry in file order. A torn final line (crash mid-append) is
  /// skipped; a malformed line elsewhere throws Error.
  static std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace icare::server
