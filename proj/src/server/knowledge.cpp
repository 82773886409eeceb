// SPDX-License-Identifier: Apache-2.0
#include "icare/server/knowledge.hpp"

#include <algorithm>
#include <cctype>

#include "icare/common/errors.hpp"

namespace icare::server {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(ConfidenceLevel level) noexcept {
  switch (level) {
    case ConfidenceLevel::Weak: return "weak";
    case ConfidenceLevel::General: return "general";
    case ConfidenceLevel::Credit: return "credit";
  }
  return "?";
}

std::optional<ConfidenceLevel> parse_level(std::string_view name) noexcept {
  for (auto l : {ConfidenceLevel::Weak, ConfidenceLevel::General, ConfidenceLevel::Credit}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

ConfidenceLevel level_for(double score) noexcept {
  if (score >= 0.7) return ConfidenceLevel::Credit;
  if (score >= 0.3) return ConfidenceLevel::General;
  return ConfidenceLevel::Weak;
}

Rating rating_from(double value) {
  if (value == 0.0) return Rating::Zero;
  if (value == 0.5) return Rating::Half;
  if (value == 1.0) return Rating::Full;
  throw ValidationError("rating must be 0, 0.5 or 1");
}

double rating_value(Rating r) noexcept { return static_cast<int>(r) * 0.5; }

void KnowledgeEntry::recompute() noexcept {
  // score = (10*S + f*n) / (20*n), S = sum of half-units, n = #ratings,
  // f = net feedback; with no ratings the mean term is 10/20.
  std::int64_t n = static_cast<std::int64_t>(evaluations.size());
  std::int64_t numerator = 0;
  if (n == 0) {
    n = 1;
    numerator = 10 + feedback_net;
  } else {
    std::int64_t half_units = 0;
    for (const auto& [who, r] : evaluations) half_units += static_cast<int>(r);
    numerator = 10 * half_units + feedback_net * n;
  }
  const auto denominator = 20 * n;
  score = std::clamp(static_cast<double>(numerator) / static_cast<double>(denominator), 0.0, 1.0);
  level = level_for(score);
}

const KnowledgeEntry& KnowledgeBase::add(const UserAccount& author, std::vector<std::string> keywords,
                                         std::string area, std::string body) {
  if (author.role != Role::Specialist) throw AuthError("only medical specialists can add knowledge");
  std::erase_if(keywords, [](const std::string& k) { return k.empty(); });
  if (keywords.empty()) throw ValidationError("knowledge entry needs at least one keyword");
  if (body.empty()) throw ValidationError("knowledge entry needs a body");
  KnowledgeEntry e;
  e.created = next_id_++;
  e.entry_id = "K" + std::to_string(e.created);
  e.keywords = std::move(keywords);
  e.area = std::move(area);
  e.body = std::move(body);
  e.author = author.user_id;
  e.recompute();
  auto id = e.entry_id;
  return entries_.emplace(std::move(id), std::move(e)).first->second;
}

KnowledgeEntry& KnowledgeBase::require(std::string_view entry_id) {
  const auto it = entries_.find(entry_id);
  if (it == entries_.end()) throw NotFound("unknown knowledge entry '" + std::string(entry_id) + "'");
  return it->second;
}

const KnowledgeEntry& KnowledgeBase::get(std::string_view entry_id) const {
  const auto it = entries_.find(entry_id);
  if (it == entries_.end()) throw NotFound("unknown knowledge entry '" + std::string(entry_id) + "'");
  return it->second;
}

const KnowledgeEntry& KnowledgeBase::evaluate(const UserAccount& specialist, std::string_view entry_id,
                                              Rating rating) {
  if (specialist.role != Role::Specialist) throw AuthError("only medical specialists can evaluate knowledge");
  auto& e = require(entry_id);
  e.evaluations[specialist.user_id] = rating;
  e.recompute();
  return e;
}

const KnowledgeEntry& KnowledgeBase::feedback(const UserAccount&, std::string_view entry_id, Verdict verdict) {
  auto& e = require(entry_id);
  e.feedback_net += verdict == Verdict::Helpful ? 1 : -1;
  e.recompute();
  return e;
}

std::vector<KnowledgeEntry> KnowledgeBase::query(std::string_view keyword, std::string_view area,
                                                 ConfidenceLevel min_level) const {
  if (keyword.empty()) throw ValidationError("keyword must not be empty");
  if (min_level == ConfidenceLevel::Weak) throw ValidationError("min_level must be general or credit");
  const auto needle = lower(keyword);
  const auto area_needle = lower(area);
  std::vector<KnowledgeEntry> out;
  for (const auto& [id, e] : entries_) {
    if (e.level < min_level) continue;
    if (!area_needle.empty() && lower(e.area) != area_needle) continue;
    const bool hit = std::any_of(e.keywords.begin(), e.keywords.end(),
                                 [&](const std::string& k) { return lower(k) == needle; });
    if (hit) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const KnowledgeEntry& a, const KnowledgeEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.created > b.created;
  });
  return out;
}

std::vector<KnowledgeEntry> KnowledgeBase::all() const {
  std::vector<KnowledgeEntry> out;
  for (const auto& [id, e] : entries_) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.created < b.created; });
  return out;
}

}  // namespace icare::server
