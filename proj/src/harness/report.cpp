// SPDX-License-Identifier: Apache-2.0
#include "icare/harness/report.hpp"

#include <array>
#include <sstream>

#include <openssl/evp.h>

#include "icare/common/errors.hpp"

namespace icare::harness {

using json = nlohmann::json;

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 init failed");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(std::string_view data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

std::string Sha256::hex() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

json report_to_json(const RunReport& r) {
  json episodes = json::array();
  for (const auto& e : r.episodes) {
    json j{{"episode", e.episode}, {"sensor_id", e.sensor_id}, {"channel", e.channel},
           {"trigger_ts", e.trigger_ts}, {"dispatched_at", e.dispatched_at}};
    j["dispatch_id"] = e.dispatch_id ? json(*e.dispatch_id) : json(nullptr);
    j["received_at"] = e.received_at ? json(*e.received_at) : json(nullptr);
    j["latency_s"] = e.latency_s ? json(*e.latency_s) : json(nullptr);
    episodes.push_back(std::move(j));
  }
  json links = json::object();
  for (const auto& [name, c] : r.links) {
    links[name] = json{{"sent", c.sent}, {"delivered", c.delivered}, {"dropped", c.dropped},
                       {"duplicated", c.duplicated}, {"balanced", c.balanced()}};
  }
  json reminders = json::array();
  for (const auto& m : r.reminders) {
    reminders.push_back(json{{"due", m.due}, {"kind", m.kind}, {"rule_id", m.rule_id}, {"text", m.text}});
  }
  return json{{"scenario", r.scenario},
              {"horizon_s", r.horizon_s},
              {"end_ts", r.end_ts},
              {"episodes", episodes},
              {"cancelled", r.cancelled},
              {"dispatches", r.dispatches},
              {"duplicate_alarms", r.duplicate_alarms},
              {"family_messages", r.family_messages},
              {"links", links},
              {"records_generated", r.records_generated},
              {"records_synced", r.records_synced},
              {"stores_match", r.stores_match},
              {"reminders", json{{"medicine", r.medicine_reminders}, {"climate", r.climate_reminders},
                                 {"fired", reminders}}},
              {"warnings", r.warnings},
              {"log_lines", r.log_lines},
              {"digest", r.digest}};
}

std::string report_summary(const RunReport& r) {
  std::ostringstream out;
  out << "scenario " << r.scenario << ": horizon " << r.horizon_s << " s, drained at " << r.end_ts << " s\n";
  out << "  alarm episodes: " << r.episodes.size() << " dispatched, " << r.cancelled << " cancelled\n";
  for (const auto& e : r.episodes) {
    out << "    #" << e.episode << " " << e.channel << " (" << e.sensor_id << ") trigger " << e.trigger_ts
        << " -> ";
    if (e.latency_s) {
      out << e.dispatch_id.value_or("?") << " at " << *e.received_at << ", latency " << *e.latency_s << " s\n";
    } else {
      out << "no dispatch received\n";
    }
  }
  out << "  emergency dispatches: " << r.dispatches << " (" << r.duplicate_alarms << " duplicate alarms skipped)\n";
  out << "  family messages: " << r.family_messages << "\n";
  out << "  records: " << r.records_generated << " generated, " << r.records_synced << " on server, stores "
      << (r.stores_match ? "match" : "DIFFER") << "\n";
  out << "  reminders: " << r.medicine_reminders << " medicine, " << r.climate_reminders << " climate\n";
  out << "  links:\n";
  for (const auto& [name, c] : r.links) {
    out << "    " << name << ": sent " << c.sent << ", delivered " << c.delivered << ", dropped " << c.dropped
        << ", duplicated " << c.duplicated << (c.balanced() ? "" : "  UNBALANCED") << "\n";
  }
  out << "  warnings: " << r.warnings << "\n";
  out << "  event log: " << r.log_lines << " lines, sha256 " << r.digest << "\n";
  return out.str();
}

}  // namespace icare::harness
