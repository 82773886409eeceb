// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace icare::server {

enum class Role { Elderly, Doctor, FamilyFriend, Specialist };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;

struct UserAccount {
  std::string user_id;
  Role role = Role::Elderly;
  std::string display_name;
  std::string token;  // static bearer token
};

enum class GrantLevel { View };

struct Grant {
  std::string subject;
  std::string grantee;
  GrantLevel level = GrantLevel::View;
};

/// Users, doctor-subject assignments and subject-issued grants.
/// Not synchronised; the Server guards it.
class Directory {
 public:
  /// Throws ValidationError on a duplicate id or token.
  void add_user(UserAccount user);
  void assign(const std::string& doctor, const std::string& subject);
  /// Only the subject may grant, and only to a family_friend account.
  void grant(const std::string& actor, const std::string& subject, const std::string& grantee);
  /// Config seeding path: skips the actor check.
  void bootstrap_grant(const std::string& subject, const std::string& grantee);

  const UserAccount* find(std::string_view user_id) const;
  /// Throws NotFound.
  const UserAccount& require(std::string_view user_id) const;
  std::optional<std::string> authenticate(std::string_view token) const;

  bool is_assigned(std::string_view doctor, std::string_view subject) const;
  bool is_granted(std::string_view subject, std::string_view grantee) const;
  /// Self, assigned doctor, or granted family/friend.
  bool can_view(std::string_view viewer, std::string_view subject) const;
  std::vector<std::string> visible_subjects(std::string_view viewer) const;
  std::vector<Grant> grants() const;
  const std::map<std::string, UserAccount, std::less<>>& users() const noexcept { return users_; }

 private:
  std::map<std::string, UserAccount, std::less<>> users_;
  std::map<std::string, std::string, std::less<>> tokens_;
  std::set<std::pair<std::string, std::string>, std::less<>> assignments_;  // (doctor, subject)
  std::set<std::pair<std::string, std::string>, std::less<>> grants_;       // (subject, grantee)
};

}  // namespace icare::server
