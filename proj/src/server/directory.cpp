// SPDX-License-Identifier: Apache-2.0
#include "icare/server/directory.hpp"

#include "icare/common/errors.hpp"
#include "icare/protocol/types.hpp"

namespace icare::server {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Elderly: return "elderly";
    case Role::Doctor: return "doctor";
    case Role::FamilyFriend: return "family_friend";
    case Role::Specialist: return "specialist";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view name) noexcept {
  for (auto r : {Role::Elderly, Role::Doctor, Role::FamilyFriend, Role::Specialist}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

void Directory::add_user(UserAccount user) {
  if (!protocol::is_valid_id(user.user_id)) throw ValidationError("invalid user id '" + user.user_id + "'");
  if (users_.contains(user.user_id)) throw ValidationError("duplicate user '" + user.user_id + "'");
  if (!user.token.empty()) {
    if (tokens_.contains(user.token)) throw ValidationError("duplicate token for '" + user.user_id + "'");
    tokens_.emplace(user.token, user.user_id);
  }
  auto id = user.user_id;
  users_.emplace(std::move(id), std::move(user));
}

void Directory::assign(const std::string& doctor, const std::string& subject) {
  if (require(doctor).role != Role::Doctor) throw ValidationError("'" + doctor + "' is not a doctor");
  if (require(subject).role != Role::Elderly) throw ValidationError("'" + subject + "' is not an elderly subject");
  assignments_.emplace(doctor, subject);
}

void Directory::bootstrap_grant(const std::string& subject, const std::string& grantee) {
  if (require(subject).role != Role::Elderly) throw ValidationError("'" + subject + "' is not an elderly subject");
  if (require(grantee).role != Role::FamilyFriend) {
    throw ValidationError("grants go to family_friend accounts only");
  }
  grants_.emplace(subject, grantee);
}

void Directory::grant(const std::string& actor, const std::string& subject, const std::string& grantee) {
  if (actor != subject) throw AuthError("only the subject can grant access to their records");
  bootstrap_grant(subject, grantee);
}

const UserAccount* Directory::find(std::string_view user_id) const {
  const auto it = users_.find(user_id);
  return it == users_.end() ? nullptr : &it->second;
}

const UserAccount& Directory::require(std::string_view user_id) const {
  if (const auto* u = find(user_id)) return *u;
  throw NotFound("unknown user '" + std::string(user_id) + "'");
}

std::optional<std::string> Directory::authenticate(std::string_view token) const {
  if (token.empty()) return std::nullopt;
  const auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

bool Directory::is_assigned(std::string_view doctor, std::string_view subject) const {
  return assignments_.contains(std::pair<std::string, std::string>(doctor, subject));
}

bool Directory::is_granted(std::string_view subject, std::string_view grantee) const {
  return grants_.contains(std::pair<std::string, std::string>(subject, grantee));
}

bool Directory::can_view(std::string_view viewer, std::string_view subject) const {
  const auto* v = find(viewer);
  const auto* s = find(subject);
  if (v == nullptr || s == nullptr || s->role != Role::Elderly) return false;
  switch (v->role) {
    case Role::Elderly: return viewer == subject;
    case Role::Doctor: return is_assigned(viewer, subject);
    case Role::FamilyFriend: return is_granted(subject, viewer);
    case Role::Specialist: return false;
  }
  return false;
}

std::vector<std::string> Directory::visible_subjects(std::string_view viewer) const {
  std::vector<std::string> out;
  for (const auto& [id, user] : users_) {
    if (user.role == Role::Elderly && can_view(viewer, id)) out.push_back(id);
  }
  return out;
}

std::vector<Grant> Directory::grants() const {
  std::vector<Grant> out;
  for (const auto& [subject, grantee] : grants_) out.push_back(Grant{subject, grantee, GrantLevel::View});
  return out;
}

}  // namespace icare::server
