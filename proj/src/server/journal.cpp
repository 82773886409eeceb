// SPDX-License-Identifier: Apache-2.0
#include "icare/server/journal.hpp"

#include <string>

#include "icare/common/errors.hpp"

namespace icare::server {

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw Error("cannot open journal " + path_.string());
}

void Journal::append(const nlohmann::json& entry) {
  out_ << entry.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("journal write failed: " + path_.string());
}

std::vector<nlohmann::json> Journal::read_all(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto j = nlohmann::json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) {
      if (i + 1 == lines.size()) break;
      throw Error("corrupt journal " + path.string() + " at line " + std::to_string(i + 1));
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace icare::server
