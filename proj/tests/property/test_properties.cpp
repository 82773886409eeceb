#include <doctest.h>

#include <cstdlib>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "alarm_oracle.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "icare/common/errors.hpp"
#include "icare/emergency/centre.hpp"
#include "icare/harness/harness.hpp"
#include "icare/harness/sim_link.hpp"
#include "icare/protocol/classify.hpp"
#include "icare/sensors/scenario.hpp"
#include "icare/server/http_api.hpp"
#include "icare/server/server.hpp"

using namespace icare;
using test::chance;
using test::Rng;
using test::uniform;

namespace {

// ICARE_SEED overrides the base seed; every case prints the seed it used.
std::uint64_t base_seed() {
  if (const char* s = std::getenv("ICARE_SEED")) return std::strtoull(s, nullptr, 10);
  return 20261016;
}

Rng seeded(std::uint64_t salt) {
  const auto seed = base_seed() ^ (salt * 0x9e3779b97f4a7c15ULL);
  MESSAGE("seed " << base_seed() << " salt " << salt);
  return Rng(seed);
}

constexpr int kCases = 2000;

server::Directory many_specialists(int n) {
  auto seed = test::ward_seed();
  for (int i = 4; i < 4 + n; ++i) {
    const auto id = "S0" + std::to_string(i);
    seed.users.push_back({id, server::Role::Specialist, id, "tok-" + id});
  }
  return server::build_directory(seed);
}

}  // namespace

// --- protocol ---------------------------------------------------------------

TEST_CASE("sms decode inverts encode") {
  auto rng = seeded(1);
  for (int i = 0; i < kCases; ++i) {
    const auto m = test::random_sms(rng);
    const auto line = protocol::encode_sms(m);
    CAPTURE(line);
    REQUIRE(line.back() == '\n');
    CHECK(protocol::decode_sms(line) == m);
    if (std::holds_alternative<protocol::AlarmSms>(m)) {
      CHECK(std::count(line.begin(), line.end(), '|') == 4);
    }
  }
}

TEST_CASE("frame unframe round trip and truncation") {
  auto rng = seeded(2);
  for (int i = 0; i < kCases; ++i) {
    const auto f = test::random_frame(rng);
    const auto bytes = protocol::frame_bulk(f);
    REQUIRE(protocol::unframe_bulk(bytes) == f);
    const auto cut = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(bytes.size()) - 1));
    CHECK_THROWS_AS(protocol::unframe_bulk(std::span(bytes).first(cut)), ProtocolError);
  }
}

TEST_CASE("classification is total and deterministic") {
  auto rng = seeded(3);
  for (int i = 0; i < kCases; ++i) {
    const auto m = test::random_sms(rng);
    if (std::holds_alternative<protocol::AlarmSms>(m)) {
      CHECK_THROWS_AS(protocol::classify_inbound(m), ProtocolError);
      continue;
    }
    const auto c = protocol::classify_inbound(m);
    CHECK(c == protocol::classify_inbound(m));
    CHECK(c == (std::holds_alternative<protocol::ThresholdSms>(m) ? protocol::InboundCategory::Threshold
                                                                   : protocol::InboundCategory::Advice));
  }
  CHECK(protocol::classify_inbound(test::hr(1, 0, 80)) ==
        protocol::InboundCategory::Physiological);
}

// --- gateway ----------------------------------------------------------------

TEST_CASE("gateway alarm decisions match the reference interpreter") {
  for (const auto channel : protocol::kAllChannels) {
    auto rng = seeded(10 + static_cast<int>(channel));
    for (int i = 0; i < kCases; ++i) {
      const auto s = test::random_alarm_stream(rng, channel);
      const auto expected = test::reference_decisions(s);
      const auto got = test::gateway_decisions(s);
      INFO("stream " << i << " expected " << test::describe(expected) << " got " << test::describe(got));
      REQUIRE(got == expected);
    }
  }
}

TEST_CASE("isolated exceedances never dispatch") {
  auto rng = seeded(20);
  for (int i = 0; i < kCases; ++i) {
    test::AlarmStream s;
    s.low = 50;
    s.high = 100;
    s.wait = uniform(rng, 1, 30);
    protocol::Timestamp t = 0;
    bool last_out = false;
    for (int k = 0; k < 50; ++k) {
      const bool out = !last_out && chance(rng, 0.5);
      s.events.push_back({t, test::StreamEvent::Sample, out ? (chance(rng, 0.5) ? 49.9 : 100.1) : 75.0});
      last_out = out;
      t += uniform(rng, 1, 10);
    }
    s.end = t + s.wait;
    CHECK(test::gateway_decisions(s).empty());
  }
}

TEST_CASE("one ALARM per target per episode") {
  auto rng = seeded(21);
  for (int i = 0; i < 300; ++i) {
    auto s = test::random_alarm_stream(rng, protocol::VitalChannel::SysBp);
    auto cfg = test::basic_config();
    cfg.enabled_channels = {s.channel};
    cfg.thresholds = {{s.channel, {s.channel, s.low, s.high, "cfg", 0}}};
    cfg.alarm_wait_s = s.wait;
    cfg.alarm_targets.clear();
    const auto n = uniform(rng, 1, 4);
    for (int k = 0; k < n; ++k) cfg.alarm_targets.push_back("T" + std::to_string(k));
    gateway::Gateway g(cfg);
    std::size_t dispatches = 0;
    std::map<std::string, std::size_t> per_target;
    std::set<std::string> lines;
    std::uint64_t seq = 0;
    const auto take = [&](const gateway::Effects& fx) {
      dispatches += test::count_of<gateway::AlarmDispatched>(fx);
      for (const auto* sms : gateway::effects_of<gateway::SmsOut>(fx)) {
        ++per_target[sms->target];
        CHECK(lines.insert(sms->target + sms->line).second);
      }
    };
    std::size_t next = 0;
    for (protocol::Timestamp t = 0; t <= s.end; ++t) {
      for (; next < s.events.size() && s.events[next].ts == t; ++next) {
        const auto& e = s.events[next];
        if (e.kind == test::StreamEvent::Sample) {
          take(g.ingest_sample({"E01", "S1", s.channel, ++seq, t, e.value}, t));
        } else if (e.kind == test::StreamEvent::Confirm) {
          take(g.respond_to_alarm_prompt(s.channel, gateway::AlarmResponse::Confirm, t));
        }
      }
      take(g.tick(t));
      take(g.tick(t));
    }
    for (const auto& target : cfg.alarm_targets) CHECK(per_target[target] == dispatches);
  }
}

TEST_CASE("sync converges to exactly the gateway's records under transport failures") {
  auto rng = seeded(22);
  for (int i = 0; i < 200; ++i) {
    auto cfg = test::basic_config();
    cfg.enabled_channels = {protocol::VitalChannel::EcgHr, protocol::VitalChannel::SysBp};
    cfg.bulk_interval_s = 10;
    gateway::Gateway g(cfg);
    server::Server srv(server::build_directory(test::ward_seed()));
    std::map<std::string, std::uint64_t> seqs;
    std::set<server::HealthRecordStore::RecordKey> expected;

    const auto deliver = [&](const protocol::BulkFrame& f, protocol::Timestamp now) {
      switch (uniform(rng, 0, 4)) {
        case 0:
          g.on_transport_failure(f.frame_id, now);
          break;
        case 1: {  // frame lands, ack lost
          srv.ingest_frame(protocol::frame_bulk(f));
          g.on_transport_failure(f.frame_id, now);
          break;
        }
        case 2: {  // delivered twice
          srv.ingest_frame(protocol::frame_bulk(f));
          g.on_ack(protocol::unframe_ack(srv.ingest_frame(protocol::frame_bulk(f))), now);
          break;
        }
        default:
          g.on_ack(protocol::unframe_ack(srv.ingest_frame(protocol::frame_bulk(f))), now);
      }
    };

    protocol::Timestamp t = 0;
    for (int step = 0; step < 60; ++step, t += uniform(rng, 1, 6)) {
      for (int k = uniform(rng, 0, 3); k > 0; --k) {
        const auto sensor = chance(rng, 0.5) ? std::string("hr") : std::string("bp");
        const auto ch = sensor == "hr" ? protocol::VitalChannel::EcgHr : protocol::VitalChannel::SysBp;
        const auto rec = test::rec(sensor, ch, ++seqs[sensor], t, static_cast<double>(uniform(rng, 40, 160)));
        g.ingest_sample(rec, t);
        expected.emplace(rec.sensor_id, rec.seq);
      }
      const auto fx = g.tick(t);
      for (const auto* out : gateway::effects_of<gateway::BulkOut>(fx)) deliver(out->frame, t);
    }
    for (int guard = 0; g.store().pending_total() > 0 && guard < 10; ++guard) {
      const auto f = g.flush_bulk(t);
      g.on_ack(protocol::unframe_ack(srv.ingest_frame(protocol::frame_bulk(f))), t);
    }
    CHECK(g.store().pending_total() == 0);
    CHECK(srv.record_keys("E01") == expected);
    CHECK(srv.record_count("E01") == expected.size());
  }
}

TEST_CASE("reminder count is floor((T - anchor) / period)") {
  auto rng = seeded(23);
  const std::vector<int> hours = {6, 8, 12};
  const std::vector<int> days = {1, 2, 3};
  for (int i = 0; i < kCases; ++i) {
    gateway::ReminderSchedule sched;
    if (chance(rng, 0.8)) sched.medicine_period_h = test::pick(rng, hours);
    if (chance(rng, 0.8)) sched.climate_period_d = test::pick(rng, days);
    sched.medicine_anchor = uniform(rng, 0, 100000);
    sched.climate_anchor = uniform(rng, 0, 100000);
    gateway::ReminderScheduler s(sched);
    const auto horizon = uniform(rng, 0, 10 * gateway::kSecondsPerDay);
    std::int64_t medicine = 0;
    std::int64_t climate = 0;
    protocol::Timestamp t = 0;
    const auto weather = [](protocol::Timestamp) { return std::optional<gateway::Weather>{}; };
    while (true) {
      for (const auto& r : s.due(t, weather)) {
        CHECK(r.due <= t);
        (r.kind == gateway::ReminderKind::Medicine ? medicine : climate) += 1;
      }
      if (t == horizon) break;
      t = std::min(horizon, t + uniform(rng, 1, 40000));
    }
    const auto expect = [&](const auto& period, std::int64_t unit, protocol::Timestamp anchor) -> std::int64_t {
      if (!period || horizon < anchor) return 0;
      return (horizon - anchor) / (*period * unit);
    };
    CHECK(medicine == expect(sched.medicine_period_h, gateway::kSecondsPerHour, sched.medicine_anchor));
    CHECK(climate == expect(sched.climate_period_d, gateway::kSecondsPerDay, sched.climate_anchor));
  }
}

TEST_CASE("gateway effect logs are deterministic") {
  auto rng = seeded(24);
  for (int i = 0; i < 200; ++i) {
    const auto s = test::random_alarm_stream(rng, protocol::VitalChannel::DiaBp);
    const auto run = [&] {
      auto cfg = test::basic_config();
      cfg.enabled_channels = {s.channel};
      cfg.thresholds = {{s.channel, {s.channel, s.low, s.high, "cfg", 0}}};
      cfg.bulk_interval_s = 7;
      cfg.reminders.medicine_period_h = 6;
      gateway::Gateway g(cfg);
      std::string log;
      std::uint64_t seq = 0;
      for (const auto& e : s.events) {
        for (const auto& fx : g.tick(e.ts)) log += gateway::effect_to_json(fx).dump() + "\n";
        if (e.kind != test::StreamEvent::Sample) continue;
        for (const auto& fx : g.ingest_sample({"E01", "S1", s.channel, ++seq, e.ts, e.value}, e.ts)) {
          log += gateway::effect_to_json(fx).dump() + "\n";
        }
      }
      return log;
    };
    CHECK(run() == run());
  }
}

// --- sensors ----------------------------------------------------------------

TEST_CASE("sample generation is pure and seq is gapless") {
  auto rng = seeded(30);
  for (int i = 0; i < 500; ++i) {
    sensors::SensorSpec spec{"s" + std::to_string(i), test::random_channel(rng), uniform(rng, 1, 60),
                             sensors::RampWave{static_cast<double>(uniform(rng, 0, 100)), 0.25}};
    const auto horizon = uniform(rng, 0, 3600);
    const auto a = sensors::generate_stream(spec, "E01", horizon);
    CHECK(a == sensors::generate_stream(spec, "E01", horizon));
    CHECK(a.size() == static_cast<std::size_t>(horizon / spec.period_s + 1));
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].seq == k + 1);
  }
}

// --- server -----------------------------------------------------------------

TEST_CASE("ingest is idempotent: store keys are the union of frames sent") {
  auto rng = seeded(40);
  for (int i = 0; i < 300; ++i) {
    server::Server srv(server::build_directory(test::ward_seed()));
    std::vector<protocol::BulkFrame> frames;
    std::set<server::HealthRecordStore::RecordKey> keys;
    for (int k = uniform(rng, 1, 6); k > 0; --k) {
      auto f = test::random_frame(rng, 10);
      f.elder_id = "E01";
      for (auto& r : f.records) r.elder_id = "E01";
      frames.push_back(f);
    }
    for (int k = 0; k < 20; ++k) {
      const auto& f = test::pick(rng, frames);
      const auto ack = srv.ingest_bulk(f);
      CHECK(ack.accepted == f.size());
      for (const auto& r : f.records) keys.emplace(r.sensor_id, r.seq);
    }
    CHECK(srv.record_keys("E01") == keys);
  }
}

TEST_CASE("authorization is total and follows the grant table") {
  auto rng = seeded(41);
  server::Server srv(server::build_directory(test::ward_seed()));
  srv.ingest_bulk({1, "E01", {test::hr(1, 1, 80), test::hr(2, 2, 81)}, {}});
  server::HttpApi api(srv, [] { return 0; });
  const std::vector<std::string> users = {"E01", "E02", "D01", "D02", "F01", "F02", "S01"};
  const std::vector<std::string> subjects = {"E01", "E02", "E77"};
  const std::vector<std::string> friends = {"F01", "F02"};
  std::set<std::pair<std::string, std::string>> granted = {{"E01", "F01"}};

  for (int i = 0; i < kCases; ++i) {
    const auto& viewer = test::pick(rng, users);
    const auto& subject = test::pick(rng, subjects);
    if (chance(rng, 0.02) && subject != "E77") {
      const auto& grantee = test::pick(rng, friends);
      srv.grant(subject, subject, grantee);
      granted.emplace(subject, grantee);
    }
    const bool allow = viewer == subject || (viewer == "D01" && subject == "E01") || granted.count({subject, viewer});
    const auto r = api.handle(net::HttpRequest::from_target("GET", "/subjects/" + subject + "/vitals", "",
                                                            "Bearer tok-" + viewer));
    CAPTURE(viewer);
    CAPTURE(subject);
    CHECK(r.status == (allow ? 200 : 403));
    if (allow && viewer != subject) CHECK(srv.view_records(viewer, subject) == srv.view_records(subject, subject));
  }
}

namespace {

// Exact band oracle: score = clamp((10h + n*net) / 20n) with h half-units over
// n ratings; unrated entries use a mean of 1/2.
server::ConfidenceLevel band_oracle(const server::KnowledgeEntry& e) {
  std::int64_t h = 0;
  for (const auto& [who, r] : e.evaluations) h += static_cast<int>(r);
  const std::int64_t n = static_cast<std::int64_t>(e.evaluations.size());
  std::int64_t num = n == 0 ? 10 + e.feedback_net : 10 * h + n * e.feedback_net;
  const std::int64_t den = n == 0 ? 20 : 20 * n;
  num = std::clamp<std::int64_t>(num, 0, den);
  if (10 * num >= 7 * den) return server::ConfidenceLevel::Credit;
  if (10 * num >= 3 * den) return server::ConfidenceLevel::General;
  return server::ConfidenceLevel::Weak;
}

}  // namespace

TEST_CASE("knowledge ranking, filtering and bands") {
  auto rng = seeded(42);
  const std::vector<std::string> words = {"salt", "walk", "sleep"};
  const std::vector<std::string> areas = {"cardiology", "nutrition", ""};
  const std::vector<double> ratings = {0, 0.5, 1};
  for (int i = 0; i < 150; ++i) {
    server::Server srv(many_specialists(6));
    std::vector<std::string> ids;
    for (int k = uniform(rng, 1, 12); k > 0; --k) {
      std::vector<std::string> kw = {test::pick(rng, words)};
      if (chance(rng, 0.3)) kw.push_back(test::pick(rng, words));
      ids.push_back(srv.add_knowledge("S01", kw, test::pick(rng, areas), "body").entry_id);
    }
    for (int k = uniform(rng, 0, 60); k > 0; --k) {
      const auto& id = test::pick(rng, ids);
      if (chance(rng, 0.5)) {
        srv.evaluate_knowledge("S0" + std::to_string(uniform(rng, 1, 9)), id, test::pick(rng, ratings));
      } else {
        srv.record_feedback("E01", id, chance(rng, 0.5) ? server::Verdict::Helpful : server::Verdict::Unhelpful);
      }
    }
    for (const auto& w : words) {
      for (const auto& area : areas) {
        const auto general = srv.query_knowledge(w, area, server::ConfidenceLevel::General);
        const auto credit = srv.query_knowledge(w, area, server::ConfidenceLevel::Credit);
        for (std::size_t k = 0; k < general.size(); ++k) {
          CHECK(general[k].level != server::ConfidenceLevel::Weak);
          CHECK(general[k].level == band_oracle(general[k]));
          if (k > 0) CHECK(general[k - 1].score >= general[k].score);
        }
        std::set<std::string> g_ids;
        for (const auto& e : general) g_ids.insert(e.entry_id);
        for (const auto& e : credit) {
          CHECK(e.level == server::ConfidenceLevel::Credit);
          CHECK(g_ids.count(e.entry_id) == 1);
        }
        CHECK(credit.size() <= general.size());
      }
    }
  }
}

TEST_CASE("server threshold reaches the gateway unchanged") {
  auto rng = seeded(43);
  server::Server srv(server::build_directory(test::ward_seed()));
  gateway::Gateway g(test::basic_config());
  srv.set_sms_sink([&](const std::string&, const std::string& line) { g.handle_sms_line(line, 0); });
  for (int i = 0; i < 500; ++i) {
    auto lo = test::random_double(rng);
    auto hi = test::random_double(rng);
    if (lo > hi) std::swap(lo, hi);
    srv.set_threshold("D01", "E01", protocol::VitalChannel::EcgHr, lo, hi, i);
    const auto stored = srv.view_thresholds("D01", "E01").at(protocol::VitalChannel::EcgHr);
    const auto active = *g.monitor(protocol::VitalChannel::EcgHr)->threshold();
    CHECK(active.low == stored.low);
    CHECK(active.high == stored.high);
  }
}

// --- emergency --------------------------------------------------------------

TEST_CASE("dispatch count equals distinct alarm triples") {
  auto rng = seeded(50);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> lines;
    for (int k = uniform(rng, 1, 15); k > 0; --k) {
      lines.push_back(protocol::encode_sms(protocol::AlarmSms{uniform(rng, 0, 5), "E0" + std::to_string(uniform(rng, 1, 3)),
                                                              "S" + std::to_string(uniform(rng, 1, 3)),
                                                              test::random_location(rng)}));
    }
    emergency::EmergencyCentre c;
    std::set<std::tuple<std::string, std::string, protocol::Timestamp>> triples;
    std::set<std::string> wire_locations;
    for (int k = 0; k < 40; ++k) {
      const auto& line = test::pick(rng, lines);
      const auto a = std::get<protocol::AlarmSms>(protocol::decode_sms(line));
      triples.emplace(a.elder_id, a.sensor_id, a.ts);
      wire_locations.insert(line.substr(line.rfind('|') + 1, line.size() - line.rfind('|') - 2));
      c.receive_alarm(line, k);
    }
    CHECK(c.dispatch_count() == triples.size());
    for (const auto& d : c.list_dispatches()) CHECK(wire_locations.count(d.location_text) == 1);
  }
}

// --- harness ----------------------------------------------------------------

TEST_CASE("sim links conserve messages") {
  auto rng = seeded(60);
  for (int i = 0; i < 500; ++i) {
    sensors::LinkSpec spec;
    spec.latency_s = uniform(rng, 0, 5);
    for (int k = uniform(rng, 0, 10); k > 0; --k) spec.drop.insert(static_cast<std::uint64_t>(uniform(rng, 0, 30)));
    for (int k = uniform(rng, 0, 10); k > 0; --k) spec.duplicate.insert(static_cast<std::uint64_t>(uniform(rng, 0, 30)));
    harness::SimLink link("bulk", spec);
    for (int k = uniform(rng, 0, 30); k > 0; --k) {
      if (chance(rng, 0.1)) link.drop_next();
      const auto plan = link.send(k);
      CHECK(plan.deliver_at == k + spec.latency_s);
      for (int c = 0; c < plan.copies; ++c) link.mark_delivered();
    }
    CHECK(link.counts().balanced());
  }
}

TEST_CASE("lossless episode latency is wait plus link latency") {
  auto rng = seeded(61);
  for (int i = 0; i < 40; ++i) {
    const auto wait = uniform(rng, 1, 60);
    const auto latency = uniform(rng, 0, 10);
    const auto period = uniform(rng, 1, 15);
    const auto text = "[scenario]\nname = lat\nhorizon = " + std::to_string(20 * period + wait) +
                      "\nlink_latency = " + std::to_string(latency) +
                      "\n[gateway]\nelder_id = E01\nenabled_channels = ECG_HR\nalarm_wait_s = " + std::to_string(wait) +
                      "\nbulk_interval_s = 60\nalarm_targets = EC\nthreshold.ECG_HR = 50, 100\n"
                      "[sensor hr]\nchannel = ECG_HR\nperiod = " +
                      std::to_string(period) + "\ngenerator = script\npoints = 0:80, " + std::to_string(3 * period) +
                      ":130, " + std::to_string(5 * period) + ":80\n";
    const auto r = harness::run_scenario(sensors::parse_scenario(text));
    REQUIRE(r.episodes.size() == 1);
    CHECK(r.episodes[0].trigger_ts == 4 * period);
    CHECK(r.episodes[0].latency_s == wait + latency);
  }
}

TEST_CASE("random scenarios replay to the same digest") {
  auto rng = seeded(62);
  for (int i = 0; i < 25; ++i) {
    std::string text = "[scenario]\nname = rnd\nhorizon = 1800\nlink_latency = " + std::to_string(uniform(rng, 0, 4)) +
                       "\n[gateway]\nelder_id = E01\nenabled_channels = ECG_HR, SYS_BP\nalarm_wait_s = " +
                       std::to_string(uniform(rng, 5, 60)) + "\nbulk_interval_s = " + std::to_string(uniform(rng, 30, 300)) +
                       "\nalarm_targets = EC, F01\nthreshold.ECG_HR = 50, 100\nthreshold.SYS_BP = 90, 140\n"
                       "medicine_period_h = 6\n";
    text += "[sensor hr]\nchannel = ECG_HR\nperiod = " + std::to_string(uniform(rng, 1, 30)) +
            "\ngenerator = script\npoints = 0:70";
    for (int k = 1; k < 8; ++k) text += ", " + std::to_string(k * 200 + uniform(rng, 0, 100)) + ":" + std::to_string(uniform(rng, 40, 130));
    text += "\n[sensor bp]\nchannel = SYS_BP\nperiod = 60\ngenerator = ramp\nstart = 100\nslope = 0.02\n";
    text += "[link bulk]\ndrop = " + std::to_string(uniform(rng, 0, 3)) + ", " + std::to_string(uniform(rng, 4, 9)) +
            "\nduplicate = " + std::to_string(uniform(rng, 0, 9)) + "\n";
    text += "[events]\n";
    for (int k = 0; k < 6; ++k) {
      const auto ts = std::to_string(uniform(rng, 0, 1800));
      switch (uniform(rng, 0, 3)) {
        case 0: text += ts + " respond ECG_HR cancel\n"; break;
        case 1: text += ts + " quick_alarm\n"; break;
        case 2: text += ts + " set_threshold D01 ECG_HR 55 95\n"; break;
        default: text += ts + " advice D01 keep warm\n"; break;
      }
    }
    const auto sc = sensors::parse_scenario(text);
    const auto a = harness::run_scenario(sc);
    const auto b = harness::run_scenario(sc);
    CHECK(a.digest == b.digest);
    CHECK(a.stores_match);
  }
}
