#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "icare/common/errors.hpp"
#include "icare/common/text_document.hpp"
#include "icare/protocol/bulk.hpp"
#include "icare/server/config.hpp"
#include "icare/server/journal.hpp"
#include "icare/server/server.hpp"
#include "fixtures.hpp"

using namespace icare;
using namespace icare::server;
using protocol::VitalChannel;

namespace {

protocol::BulkFrame frame_of(std::uint64_t id, std::uint64_t first_seq, std::size_t n, std::string elder = "E01") {
  protocol::BulkFrame f{id, elder, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto seq = first_seq + i;
    f.records.push_back(test::rec("S-ECG-1", VitalChannel::EcgHr, seq, static_cast<protocol::Timestamp>(seq * 10),
                                  70 + static_cast<double>(i), elder));
  }
  return f;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("icare-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("directory rules") {
  auto dir = build_directory(test::ward_seed());
  CHECK(dir.authenticate("tok-D01") == std::optional<std::string>("D01"));
  CHECK_FALSE(dir.authenticate("nope"));
  CHECK(dir.can_view("E01", "E01"));
  CHECK(dir.can_view("D01", "E01"));
  CHECK_FALSE(dir.can_view("D02", "E01"));
  CHECK(dir.can_view("F01", "E01"));
  CHECK_FALSE(dir.can_view("F02", "E01"));
  CHECK_FALSE(dir.can_view("E02", "E01"));
  CHECK(dir.visible_subjects("F01") == std::vector<std::string>{"E01"});
  CHECK(dir.visible_subjects("D02").empty());

  CHECK_THROWS_AS(dir.add_user({"E01", Role::Elderly, "", "x"}), ValidationError);
  CHECK_THROWS_AS(dir.add_user({"E09", Role::Elderly, "", "tok-E01"}), ValidationError);
  CHECK_THROWS_AS(dir.grant("D01", "E01", "F02"), AuthError);
  CHECK_THROWS_AS(dir.grant("E01", "E01", "D02"), ValidationError);
  dir.grant("E01", "E01", "F02");
  CHECK(dir.is_granted("E01", "F02"));
  CHECK_THROWS_AS(dir.require("ZZ"), NotFound);
  CHECK(parse_role("family_friend") == Role::FamilyFriend);
  CHECK_FALSE(parse_role("admin"));
}

TEST_CASE("ingest_bulk examples") {
  Server s(build_directory(test::ward_seed()));
  const auto f = frame_of(1, 1, 5);
  CHECK(s.ingest_bulk(f).accepted == 5);
  CHECK(s.record_count("E01") == 5);
  const auto again = f;
  CHECK(s.ingest_bulk(again).accepted == 5);
  CHECK(s.record_count("E01") == 5);
  CHECK(s.ingest_bulk(protocol::BulkFrame{3, "E01", {}, {}}).accepted == 0);
}

TEST_CASE("malformed frames insert nothing") {
  Server s(build_directory(test::ward_seed()));
  CHECK(s.ingest_bulk(frame_of(1, 1, 3, "E99")).accepted == 0);
  auto mixed = frame_of(2, 1, 3);
  mixed.records[1].elder_id = "E02";
  CHECK(s.ingest_bulk(mixed).accepted == 0);
  CHECK(s.record_count("E01") == 0);
  CHECK(s.ingest_bulk(frame_of(3, 1, 3, "D01")).accepted == 0);
  auto unordered = frame_of(4, 1, 3);
  std::swap(unordered.records[0], unordered.records[2]);
  CHECK(s.ingest_bulk(unordered).accepted == 0);
  CHECK(s.record_count("E01") == 0);
}

TEST_CASE("ingest_frame speaks the wire format") {
  Server s(build_directory(test::ward_seed()));
  const auto bytes = protocol::frame_bulk(frame_of(7, 1, 2));
  const auto ack = protocol::unframe_ack(s.ingest_frame(bytes));
  CHECK(ack.frame_id == 7);
  CHECK(ack.accepted == 2);
  const protocol::Bytes junk{0, 0, 0, 3, 'a', 'b', 'c'};
  CHECK(protocol::unframe_ack(s.ingest_frame(junk)).accepted == 0);
}

TEST_CASE("events ride along and dedup by seq") {
  Server s(build_directory(test::ward_seed()));
  auto f = frame_of(1, 1, 1);
  f.events.push_back({1, protocol::GatewayEventKind::AlarmDispatched, 40, "ECG_HR"});
  CHECK(s.ingest_bulk(f).accepted == 2);
  CHECK(s.ingest_bulk(f).accepted == 2);
  CHECK(s.view_alarms("E01", "E01").size() == 1);
}

TEST_CASE("view_records examples") {
  Server s(build_directory(test::ward_seed()));
  s.ingest_bulk(frame_of(1, 1, 4));
  const auto self = s.view_records("E01", "E01");
  CHECK(self.size() == 4);
  CHECK_THROWS_AS(s.view_records("F02", "E01"), AuthError);
  CHECK(s.view_records("F01", "E01") == self);
  CHECK(s.view_records("D01", "E01", 30).size() == 2);
  CHECK_THROWS_AS(s.view_records("D02", "E01"), AuthError);
  CHECK_THROWS_AS(s.view_records("E01", "E77"), AuthError);  // unknown subjects look like denials
}

TEST_CASE("set_threshold examples") {
  Server s(build_directory(test::ward_seed()));
  std::vector<std::pair<std::string, std::string>> sent;
  s.set_sms_sink([&](const std::string& elder, const std::string& line) { sent.emplace_back(elder, line); });

  const auto msg = s.set_threshold("D01", "E01", VitalChannel::EcgHr, 50, 100, 42);
  CHECK(protocol::encode_sms(msg) == "THRESH|42|E01|ECG_HR|50|100|D01\n");
  REQUIRE(sent.size() == 1);
  CHECK(sent[0].first == "E01");
  CHECK(sent[0].second == "THRESH|42|E01|ECG_HR|50|100|D01\n");
  CHECK(s.view_thresholds("F01", "E01").at(VitalChannel::EcgHr).high == 100);

  CHECK_THROWS_AS(s.set_threshold("F01", "E01", VitalChannel::EcgHr, 50, 100, 43), AuthError);
  CHECK_THROWS_AS(s.set_threshold("D02", "E01", VitalChannel::EcgHr, 50, 100, 43), AuthError);
  CHECK_THROWS_AS(s.set_threshold("D01", "E01", VitalChannel::EcgHr, 100, 50, 43), ValidationError);
  CHECK_NOTHROW(s.set_threshold("D01", "E01", VitalChannel::EcgHr, 70, 70, 44));
  CHECK(sent.size() == 2);
}

TEST_CASE("send_advice examples") {
  Server s(build_directory(test::ward_seed()));
  std::vector<std::string> lines;
  s.set_sms_sink([&](const std::string&, const std::string& line) { lines.push_back(line); });
  const auto msg = s.send_advice("D01", "E01", "reduce salt", 9);
  CHECK(msg.text == "reduce salt");
  REQUIRE(lines.size() == 1);
  CHECK(lines[0] == "ADVICE|9|E01|D01|reduce salt\n");
  const auto history = s.view_history("E01", "E01");
  REQUIRE(history.size() == 1);
  CHECK(history[0].kind == "advice_sent");
  CHECK_THROWS_AS(s.send_advice("D01", "E01", "", 10), ValidationError);
  CHECK_THROWS_AS(s.send_advice("D02", "E01", "x", 10), AuthError);
  CHECK_THROWS_AS(s.send_advice("D01", "E01", "caf\xc3\xa9", 10), Error);
}

TEST_CASE("thread examples") {
  Server s(build_directory(test::ward_seed()));
  const auto t = s.open_thread("E01", {"D01"});
  CHECK(t.participants == std::set<std::string>{"D01", "E01"});
  CHECK(s.read_thread("D01", t.thread_id).messages.empty());
  s.post_message("E01", t.thread_id, "Is 105 bpm too high?", 1);
  s.post_message("D01", t.thread_id, "Rest and re-measure.", 2);
  const auto read = s.read_thread("E01", t.thread_id);
  REQUIRE(read.messages.size() == 2);
  CHECK(read.messages[0].author == "E01");
  CHECK(read.messages[1].author == "D01");
  CHECK_THROWS_AS(s.read_thread("F02", t.thread_id), AuthError);
  CHECK_THROWS_AS(s.post_message("F02", t.thread_id, "hi", 3), AuthError);
  CHECK_THROWS_AS(s.read_thread("E01", "T999"), NotFound);
  CHECK_THROWS_AS(s.open_thread("E01", {"D01"}, t.thread_id), ValidationError);
}

TEST_CASE("knowledge authoring and scoring") {
  Server s(build_directory(test::ward_seed()));
  const auto e = s.add_knowledge("S01", {"Hypertension", "salt"}, "cardiology", "Limit salt to 5 g per day.");
  CHECK(e.score == 0.5);
  CHECK(e.level == ConfidenceLevel::General);
  CHECK_THROWS_AS(s.add_knowledge("D01", {"x"}, "a", "b"), AuthError);
  CHECK_THROWS_AS(s.add_knowledge("S01", {}, "a", "b"), ValidationError);

  SUBCASE("ratings 1, 1, 0.5 reach credit") {
    s.evaluate_knowledge("S01", e.entry_id, 1);
    s.evaluate_knowledge("S02", e.entry_id, 1);
    const auto r = s.evaluate_knowledge("S03", e.entry_id, 0.5);
    CHECK(r.score == doctest::Approx(5.0 / 6.0));
    CHECK(r.level == ConfidenceLevel::Credit);
  }
  SUBCASE("ratings 0, 0 are weak and hidden") {
    s.evaluate_knowledge("S01", e.entry_id, 0);
    const auto r = s.evaluate_knowledge("S02", e.entry_id, 0);
    CHECK(r.score == 0);
    CHECK(r.level == ConfidenceLevel::Weak);
    CHECK(s.query_knowledge("salt", "").empty());
  }
  SUBCASE("single rating 0.5 is general") {
    CHECK(s.evaluate_knowledge("S01", e.entry_id, 0.5).level == ConfidenceLevel::General);
  }
  SUBCASE("re-rating replaces") {
    s.evaluate_knowledge("S01", e.entry_id, 0);
    CHECK(s.evaluate_knowledge("S01", e.entry_id, 1).score == 1);
  }
  SUBCASE("only specialists rate, only menu values") {
    CHECK_THROWS_AS(s.evaluate_knowledge("D01", e.entry_id, 1), AuthError);
    CHECK_THROWS_AS(s.evaluate_knowledge("S01", e.entry_id, 0.7), ValidationError);
    CHECK_THROWS_AS(s.evaluate_knowledge("S01", "K999", 1), NotFound);
  }
  SUBCASE("feedback moves the score and clamps") {
    s.record_feedback("E01", e.entry_id, Verdict::Helpful);
    const auto back = s.record_feedback("F01", e.entry_id, Verdict::Unhelpful);
    CHECK(back.score == 0.5);
    s.evaluate_knowledge("S01", e.entry_id, 0);
    const auto floor = s.record_feedback("E01", e.entry_id, Verdict::Unhelpful);
    CHECK(floor.score == 0);
  }
}

TEST_CASE("feedback can flip the band") {
  // 0.68 is not reachable from ratings alone; the entry is driven directly.
  KnowledgeEntry e;
  e.evaluations = {{"S01", Rating::Half}};
  e.feedback_net = 0;
  e.recompute();
  CHECK(e.level == ConfidenceLevel::General);
  e.feedback_net = 4;  // 0.5 + 0.2 = 0.70
  e.recompute();
  CHECK(e.score == doctest::Approx(0.7));
  CHECK(e.level == ConfidenceLevel::Credit);
  CHECK(level_for(0.68) == ConfidenceLevel::General);
  CHECK(level_for(0.73) == ConfidenceLevel::Credit);
  CHECK(level_for(0.3) == ConfidenceLevel::General);
  CHECK(level_for(0.2999) == ConfidenceLevel::Weak);
}

TEST_CASE("query_knowledge examples") {
  Server s(build_directory(test::ward_seed()));
  const auto credit = s.add_knowledge("S01", {"salt"}, "cardiology", "credit entry");
  const auto weak = s.add_knowledge("S01", {"SALT"}, "cardiology", "weak entry");
  const auto general = s.add_knowledge("S02", {"salt", "diet"}, "nutrition", "general entry");
  s.evaluate_knowledge("S01", credit.entry_id, 1);
  s.evaluate_knowledge("S01", weak.entry_id, 0);

  const auto all = s.query_knowledge("Salt", "");
  REQUIRE(all.size() == 2);
  CHECK(all[0].entry_id == credit.entry_id);
  CHECK(all[1].entry_id == general.entry_id);

  const auto only_credit = s.query_knowledge("salt", "", ConfidenceLevel::Credit);
  REQUIRE(only_credit.size() == 1);
  CHECK(only_credit[0].entry_id == credit.entry_id);

  CHECK(s.query_knowledge("salt", "nutrition").size() == 1);
  CHECK(s.query_knowledge("sal", "").empty());
  CHECK(s.query_knowledge("sugar", "").empty());
  CHECK_THROWS_AS(s.query_knowledge("salt", "", ConfidenceLevel::Weak), ValidationError);
  CHECK_THROWS_AS(s.query_knowledge("", ""), ValidationError);
}

TEST_CASE("ties rank newest first") {
  Server s(build_directory(test::ward_seed()));
  const auto a = s.add_knowledge("S01", {"walk"}, "", "a");
  const auto b = s.add_knowledge("S01", {"walk"}, "", "b");
  const auto r = s.query_knowledge("walk", "");
  REQUIRE(r.size() == 2);
  CHECK(r[0].entry_id == b.entry_id);
  CHECK(r[1].entry_id == a.entry_id);
}

TEST_CASE("live feed pushes vitals, alarms, thresholds and advice") {
  Server s(build_directory(test::ward_seed()));
  std::vector<nlohmann::json> seen;
  const auto id = s.subscribe("F01", "E01", [&](const nlohmann::json& e) { seen.push_back(e); });
  auto f = frame_of(1, 1, 2);
  f.events.push_back({1, protocol::GatewayEventKind::AlarmDispatched, 40, "ECG_HR"});
  s.ingest_bulk(f);
  s.set_threshold("D01", "E01", VitalChannel::EcgHr, 50, 100, 5);
  s.ingest_bulk(f);  // duplicates publish nothing
  s.send_advice("D01", "E01", "less salt", 6);
  REQUIRE(seen.size() == 5);
  CHECK(seen[0]["type"] == "vital");
  CHECK(seen[2]["type"] == "alarm");
  CHECK(seen[3]["type"] == "threshold");
  CHECK(seen[4]["type"] == "advice");
  CHECK(seen[4]["advice"]["text"] == "less salt");
  s.unsubscribe(id);
  s.ingest_bulk(frame_of(2, 3, 1));
  CHECK(seen.size() == 5);
  CHECK_THROWS_AS(s.subscribe("F02", "E01", [](const nlohmann::json&) {}), AuthError);
}

TEST_CASE("journal replay restores every store") {
  const auto dir = fresh_dir("replay");
  std::string thread_id;
  std::string entry_id;
  {
    Server s(build_directory(test::ward_seed()), ServerOptions{dir});
    s.ingest_bulk(frame_of(1, 1, 3));
    s.set_threshold("D01", "E01", VitalChannel::EcgHr, 55, 95, 1);
    s.send_advice("D01", "E01", "rest", 2);
    s.grant("E01", "E01", "F02");
    thread_id = s.open_thread("E01", {"D01"}).thread_id;
    s.post_message("D01", thread_id, "hello", 3);
    entry_id = s.add_knowledge("S01", {"salt"}, "", "body").entry_id;
    s.evaluate_knowledge("S02", entry_id, 1);
    s.record_feedback("E01", entry_id, Verdict::Helpful);
  }
  Server again(build_directory(test::ward_seed()), ServerOptions{dir});
  CHECK(again.record_count("E01") == 3);
  CHECK(again.view_thresholds("E01", "E01").at(VitalChannel::EcgHr).low == 55);
  CHECK(again.view_history("E01", "E01").size() == 2);
  CHECK_NOTHROW(again.view_records("F02", "E01"));
  CHECK(again.read_thread("E01", thread_id).messages.size() == 1);
  const auto k = again.query_knowledge("salt", "");
  REQUIRE(k.size() == 1);
  CHECK(k[0].score == doctest::Approx(1.0));
  // ids keep counting after a restart
  CHECK(again.open_thread("E01", {"D01"}).thread_id != thread_id);
  CHECK(again.add_knowledge("S01", {"x"}, "", "y").entry_id != entry_id);
  std::filesystem::remove_all(dir);
}

TEST_CASE("journal tolerates a torn tail only") {
  const auto dir = fresh_dir("torn");
  const auto path = dir / "j.jsonl";
  {
    Journal j(path);
    j.append({{"a", 1}});
    j.append({{"a", 2}});
  }
  { std::ofstream(path, std::ios::app) << R"({"a": 3)"; }
  CHECK(Journal::read_all(path).size() == 2);
  { std::ofstream(path, std::ios::app) << "\n" << R"({"a": 4})" << "\n"; }
  CHECK_THROWS_AS(Journal::read_all(path), Error);
  CHECK(Journal::read_all(dir / "missing.jsonl").empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("server config file") {
  const auto cfg = parse_server_config(parse_text_document(R"(
listen_http = 127.0.0.1:18080
data_dir = /tmp/icare
sms_route.E01 = 127.0.0.1:9100

[users]
E01 elderly tok-e Wang Li
D01 doctor tok-d

[assignments]
D01 E01
)"));
  CHECK(cfg.listen_http == "127.0.0.1:18080");
  CHECK(cfg.listen_bulk == "127.0.0.1:9000");
  CHECK(cfg.data_dir == std::optional<std::string>("/tmp/icare"));
  CHECK(cfg.sms_routes.at("E01") == "127.0.0.1:9100");
  REQUIRE(cfg.directory.users.size() == 2);
  CHECK(cfg.directory.users[0].display_name == "Wang Li");
  const auto dir = build_directory(cfg.directory);
  CHECK(dir.is_assigned("D01", "E01"));

  CHECK_THROWS_AS(parse_server_config(parse_text_document("bogus = 1\n")), ParseError);
  CHECK_THROWS_AS(parse_server_config(parse_text_document("[users]\nX01 wizard tok\n")), ParseError);
  DirectorySeed bad;
  bad.users = {{"D01", Role::Doctor, "", "t"}};
  bad.assignments = {{"D01", "E42"}};
  CHECK_THROWS_AS(build_directory(bad), Error);
}
