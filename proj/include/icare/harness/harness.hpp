// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icare/common/errors.hpp"
#include "icare/emergency/centre.hpp"
#include "icare/gateway/gateway.hpp"
#include "icare/harness/report.hpp"
#include "icare/harness/sim_link.hpp"
#include "icare/harness/virtual_clock.hpp"
#include "icare/sensors/scenario.hpp"
#include "icare/server/config.hpp"
#include "icare/server/server.hpp"

namespace icare::harness {

/// A component failure during a run, tagged with the virtual time of the
/// event that caused it.
class RunError : public Error {
 public:
  RunError(Timestamp ts, const std::string& what) : Error("t=" + std::to_string(ts) + ": " + what), ts_(ts) {}
  Timestamp ts() const noexcept { return ts_; }

 private:
  Timestamp ts_;
};

/// Users for the scenario's server. Without a [users] section the elder and a
/// doctor D01 assigned to them are created; the elder is added when missing.
server::DirectorySeed directory_seed_for(const sensors::Scenario& scenario);

/// Step-hold weather lookup over the scenario's weather rows. The first row
/// also covers the time before it; no rows means no weather.
gateway::WeatherProvider scripted_weather(std::vector<sensors::WeatherPoint> points);

/// Pairs gateway dispatches with the centre's records by (sensor, alarm ts).
std::vector<EpisodeReport> episode_reports(const std::vector<gateway::AlarmDispatched>& dispatched,
                                           const std::vector<emergency::DispatchRecord>& dispatches);

struct HarnessOptions {
  /// Extra virtual time allowed after the horizon for in-flight traffic and
  /// retries to settle. Default: 50 bulk intervals.
  std::optional<Timestamp> max_drain_s;
  /// Called with every event log line as it is written.
  std::function<void(const std::string&)> log_sink;
};

/// Runs one scenario in virtual time with gateway, server and emergency
/// centre wired together over scripted links. Single-threaded.
///
/// Each second t: scenario events at t (file order), then sensor samples,
/// then gateway tick(t). Link deliveries land at send time + latency; ones
/// due at the same second as a tick run before it.
class SimHarness {
 public:
  explicit SimHarness(sensors::Scenario scenario, HarnessOptions options = {});

  /// Runs to the horizon, then drains. Call once.
  RunReport run();

  const sensors::Scenario& scenario() const noexcept { return scenario_; }
  const gateway::Gateway& gateway() const noexcept { return gateway_; }
  server::Server& server() noexcept { return *server_; }
  const emergency::EmergencyCentre& centre() const noexcept { return centre_; }
  const VirtualClock& clock() const noexcept { return clock_; }
  const SimLink& link(const std::string& name) const { return links_.at(name); }
  /// (target, line) for every alarm SMS that reached a non-emergency target.
  const std::vector<std::pair<std::string, std::string>>& family_inbox() const noexcept { return family_inbox_; }

 private:
  void second(Timestamp t);
  void apply(const sensors::ScenarioEvent& event);
  void handle(const gateway::Effects& effects);
  void log(nlohmann::json entry);
  void send(const std::string& link, std::function<void()> deliver, const nlohmann::json& what);
  bool quiescent() const;
  RunReport build_report();

  sensors::Scenario scenario_;
  HarnessOptions options_;
  VirtualClock clock_;
  std::optional<protocol::Location> fix_;
  bool fix_lost_ = false;
  gateway::Gateway gateway_;
  std::unique_ptr<server::Server> server_;
  emergency::EmergencyCentre centre_;
  std::map<std::string, SimLink> links_;
  std::map<std::string, std::uint64_t> next_seq_;  // per sensor
  std::set<std::uint64_t> awaiting_ack_;
  std::size_t next_event_ = 0;
  std::size_t in_transit_ = 0;
  bool finished_ = false;
  bool ran_ = false;

  std::vector<gateway::AlarmDispatched> dispatched_;
  std::vector<std::pair<std::string, std::string>> family_inbox_;
  std::uint64_t cancelled_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t generated_ = 0;
  std::uint64_t warnings_ = 0;
  std::vector<ReminderReport> reminders_;
  std::uint64_t log_lines_ = 0;
  Sha256 digest_;
};

RunReport run_scenario(const sensors::Scenario& scenario, HarnessOptions options = {});

/// Path of a shipped scenario by name ("two_exceedance" or a file name).
/// Searches $ICARE_SCENARIO_DIR, then the build-time scenario directory.
std::string find_scenario(const std::string& name);
std::vector<std::string> shipped_scenarios();

}  // namespace icare::harness
