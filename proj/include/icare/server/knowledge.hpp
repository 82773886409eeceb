// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icare/server/directory.hpp"

namespace icare::server {

enum class ConfidenceLevel { Weak, General, Credit };

std::string_view to_string(ConfidenceLevel level) noexcept;
std::optional<ConfidenceLevel> parse_level(std::string_view name) noexcept;

/// credit iff score >= 0.7, general iff 0.3 <= score < 0.7, weak below.
ConfidenceLevel level_for(double score) noexcept;

/// Specialist ratings are 0, 0.5 or 1; kept as half-units so the score stays
/// an exact rational until the final division.
enum class Rating : int { Zero = 0, Half = 1, Full = 2 };

/// Throws ValidationError for anything but 0, 0.5 or 1.
Rating rating_from(double value);
double rating_value(Rating r) noexcept;

enum class Verdict { Helpful, Unhelpful };

inline constexpr double kFeedbackStep = 0.05;

struct KnowledgeEntry {
  std::string entry_id;
  std::uint64_t created = 0;  // creation order; larger is newer
  std::vector<std::string> keywords;
  std::string area;
  std::string body;
  std::string author;
  std::map<std::string, Rating> evaluations;  // one per specialist
  std::int64_t feedback_net = 0;              // helpful minus unhelpful
  double score = 0.5;
  ConfidenceLevel level = ConfidenceLevel::General;

  double feedback_delta() const noexcept { return static_cast<double>(feedback_net) * kFeedbackStep; }
  /// clamp(mean(ratings) + feedback_delta, 0, 1) with mean = 0.5 when unrated.
  void recompute() noexcept;
};

/// Specialist-authored medical knowledge with a dynamic confidence score.
/// Not synchronised; the Server guards it.
class KnowledgeBase {
 public:
  /// Specialist-only. Keywords must be non-empty.
  const KnowledgeEntry& add(const UserAccount& author, std::vector<std::string> keywords, std::string area,
                            std::string body);
  /// Specialist-only; a second rating from the same specialist replaces the first.
  const KnowledgeEntry& evaluate(const UserAccount& specialist, std::string_view entry_id, Rating rating);
  const KnowledgeEntry& feedback(const UserAccount& user, std::string_view entry_id, Verdict verdict);

  /// Case-insensitive exact keyword token match, optional area filter (empty
  /// matches every area). Score descending, newest first on ties. Weak
  /// entries never appear; min_level weak is a ValidationError.
  std::vector<KnowledgeEntry> query(std::string_view keyword, std::string_view area,
                                    ConfidenceLevel min_level = ConfidenceLevel::General) const;

  const KnowledgeEntry& get(std::string_view entry_id) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<KnowledgeEntry> all() const;

 private:
  KnowledgeEntry& require(std::string_view entry_id);

  std::map<std::string, KnowledgeEntry, std::less<>> entries_;
  std::uint64_t next_id_ = 1;
};

}  // namespace icare::server
