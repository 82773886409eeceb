// SPDX-License-Identifier: Apache-2.0
// icare: run scenarios, and serve the server, emergency centre, gateway and
// sensor feed as standalone processes.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "icare/common/errors.hpp"
#include "icare/emergency/centre.hpp"
#include "icare/gateway/config.hpp"
#include "icare/gateway/gateway.hpp"
#include "icare/harness/harness.hpp"
#include "icare/harness/live.hpp"
#include "icare/net/http_server.hpp"
#include "icare/net/stream.hpp"
#include "icare/protocol/json.hpp"
#include "icare/sensors/scenario.hpp"
#include "icare/server/config.hpp"
#include "icare/server/http_api.hpp"

using namespace icare;
using json = nlohmann::json;
using protocol::Timestamp;

namespace {

std::atomic<bool> g_stop{false};

void wait_for_signal() {
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
}

void write_report(const harness::RunReport& report, const std::string& path) {
  std::cout << harness::report_summary(report);
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error("cannot write report to " + path);
  out << harness::report_to_json(report).dump(2) << "\n";
  std::cout << "report written to " << path << "\n";
}

harness::RunReport run_file(const std::string& path, const std::string& log_path, bool live, double scale,
                            const std::string& http) {
  const auto scenario = sensors::load_scenario(path);
  std::ofstream log_file;
  std::function<void(const std::string&)> sink;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw Error("cannot write log to " + log_path);
    sink = [&log_file](const std::string& line) { log_file << line << '\n'; };
  }
  if (live) {
    harness::LiveOptions opts;
    opts.time_scale = scale;
    opts.http_listen = http;
    opts.log_sink = sink;
    return harness::run_live(scenario, opts);
  }
  harness::HarnessOptions opts;
  opts.log_sink = sink;
  return harness::run_scenario(scenario, opts);
}

// `gateway --mode sim`: one command per stdin line, effects as JSON lines.
//   <ts> sample <sensor> <channel> <value>
//   <ts> sms <line...>
//   <ts> respond <channel> cancel|confirm
//   <ts> quick_alarm | <ts> mode monitoring|paused | <ts> tick
//   <ts> ack <frame> <count> | <ts> fail <frame>
// The gateway is ticked through every second up to each command's ts.
int gateway_sim(const gateway::GatewayConfig& cfg) {
  gateway::Gateway gw(cfg);
  std::map<std::string, std::uint64_t> seqs;
  Timestamp last_tick = -1;
  auto emit = [](Timestamp t, const gateway::Effects& effects) {
    for (const auto& e : effects) std::cout << json{{"t", t}, {"effect", gateway::effect_to_json(e)}}.dump() << "\n";
  };
  std::string line;
  std::size_t n = 0;
  while (std::getline(std::cin, line)) {
    ++n;
    const auto t = split_ws_rest(line, 2);
    if (t.empty() || t[0].starts_with('#')) continue;
    try {
      if (t.size() < 2) throw ParseError(n, "expected '<ts> <command> ...'");
      const auto ts = parse_int(t[0], n);
      if (ts < last_tick) throw ParseError(n, "timestamps must not decrease");
      while (last_tick < ts - 1) {
        ++last_tick;
        emit(last_tick, gw.tick(last_tick));
      }
      const auto& cmd = t[1];
      const auto args = t.size() > 2 ? split_ws(t[2]) : std::vector<std::string>{};
      if (cmd == "sample" && args.size() == 3) {
        const auto ch = protocol::parse_channel(args[1]);
        if (!ch) throw ParseError(n, "unknown channel '" + args[1] + "'");
        protocol::VitalRecord rec{cfg.elder_id, args[0], *ch, ++seqs[args[0]], ts, parse_double(args[2], n)};
        emit(ts, gw.ingest_sample(rec, ts));
      } else if (cmd == "sms" && t.size() == 3) {
        emit(ts, gw.handle_sms_line(t[2], ts));
      } else if (cmd == "respond" && args.size() == 2) {
        const auto ch = protocol::parse_channel(args[0]);
        if (!ch || (args[1] != "cancel" && args[1] != "confirm")) throw ParseError(n, "respond <channel> cancel|confirm");
        emit(ts, gw.respond_to_alarm_prompt(
                     *ch, args[1] == "cancel" ? gateway::AlarmResponse::Cancel : gateway::AlarmResponse::Confirm, ts));
      } else if (cmd == "quick_alarm") {
        emit(ts, gw.quick_alarm(ts));
      } else if (cmd == "mode" && args.size() == 1) {
        emit(ts, gw.set_mode(args[0] == "paused" ? gateway::SystemMode::Paused : gateway::SystemMode::Monitoring, ts));
      } else if (cmd == "ack" && args.size() == 2) {
        emit(ts, gw.on_ack({static_cast<std::uint64_t>(parse_int(args[0], n)),
                            static_cast<std::uint64_t>(parse_int(args[1], n))}, ts));
      } else if (cmd == "fail" && args.size() == 1) {
        emit(ts, gw.on_transport_failure(static_cast<std::uint64_t>(parse_int(args[0], n)), ts));
      } else if (cmd != "tick") {
        throw ParseError(n, "unknown command '" + line + "'");
      }
      if (last_tick < ts) {
        last_tick = ts;
        emit(ts, gw.tick(ts));
      }
    } catch (const ParseError& e) {
      std::cerr << "stdin " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}

int gateway_live(const std::string& path, double scale) {
  const auto doc = load_text_document(path);
  const auto cfg = gateway::load_gateway_config(path);
  const auto& root = doc.root();
  harness::GatewayRoutes routes;
  if (auto bulk = root.get("server_bulk")) routes.server_bulk = net::Endpoint::parse(*bulk);
  for (const auto& e : root.entries) {
    if (e.key.starts_with("sms_route.")) routes.sms[e.key.substr(10)] = net::Endpoint::parse(e.value);
  }
  auto clock = std::make_shared<harness::ScaledClock>(scale);
  harness::GatewayLoop loop(gateway::Gateway(cfg), routes, clock,
                            [](Timestamp t, const gateway::Effect& e) {
                              std::cout << json{{"t", t}, {"effect", gateway::effect_to_json(e)}}.dump() << std::endl;
                            });
  loop.start(root.get("listen_sensors").value_or("127.0.0.1:9200"), root.get("listen_sms").value_or("127.0.0.1:9100"));
  std::cerr << "gateway " << cfg.elder_id << ": sensors on port " << loop.sensor_port() << ", sms on port "
            << loop.sms_port() << "\n";
  wait_for_signal();
  loop.stop();
  return 0;
}

int serve_server(const std::string& path) {
  const auto cfg = server::load_server_config(path);
  server::ServerOptions opts;
  if (cfg.data_dir) opts.data_dir = *cfg.data_dir;
  server::Server srv(server::build_directory(cfg.directory), opts);
  std::map<std::string, net::Endpoint> routes;
  for (const auto& [elder, ep] : cfg.sms_routes) routes.emplace(elder, net::Endpoint::parse(ep));
  srv.set_sms_sink([routes](const std::string& elder, const std::string& line) {
    const auto it = routes.find(elder);
    if (it == routes.end()) {
      std::cerr << "no sms route for " << elder << ", dropped: " << line;
      return;
    }
    try {
      net::send_lines(it->second, {line});
    } catch (const net::TransportError& e) {
      std::cerr << "sms to " << elder << " failed: " << e.what() << "\n";
    }
  });
  server::HttpApi api(srv, [] {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  });
  const auto http_ep = net::Endpoint::parse(cfg.listen_http);
  const auto bulk_ep = net::Endpoint::parse(cfg.listen_bulk);
  net::HttpServer http(http_ep.host, http_ep.port, [&api](const net::HttpRequest& r) { return api.handle(r); },
                       api.live_route());
  net::FrameServer bulk(bulk_ep.host, bulk_ep.port, [&srv](const protocol::Bytes& f) { return srv.ingest_frame(f); });
  std::cerr << "server: http on port " << http.port() << ", bulk on port " << bulk.port() << "\n";
  wait_for_signal();
  return 0;
}

int serve_emergency(const std::string& sms, const std::string& http_listen, const std::string& audit) {
  emergency::EmergencyCentre centre(audit.empty() ? std::nullopt : std::optional<std::filesystem::path>(audit));
  auto now = [] {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
  const auto sms_ep = net::Endpoint::parse(sms);
  const auto http_ep = net::Endpoint::parse(http_listen);
  net::LineServer intake(sms_ep.host, sms_ep.port, [&](const std::string& line) {
    const auto r = centre.receive_alarm(line, now());
    std::cout << to_string(r.outcome) << (r.dispatch ? " " + r.dispatch->dispatch_id : "")
              << (r.reason.empty() ? "" : " " + r.reason) << std::endl;
    return std::optional<std::string>{};
  });
  net::HttpServer http(http_ep.host, http_ep.port, [&](const net::HttpRequest& r) { return centre.handle_http(r); });
  std::cerr << "emergency centre: sms on port " << intake.port() << ", http on port " << http.port() << "\n";
  wait_for_signal();
  return 0;
}

int emit_sensors(const std::string& path, const std::string& target, double scale) {
  const auto sc = sensors::load_scenario(path);
  if (target == "stdout") {
    std::vector<protocol::VitalRecord> all;
    for (const auto& spec : sc.sensors) {
      auto s = sensors::generate_stream(spec, sc.gateway.elder_id, sc.horizon_s);
      all.insert(all.end(), s.begin(), s.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });
    for (const auto& r : all) std::cout << protocol::encode_record_line(r);
    return 0;
  }
  const auto to = net::Endpoint::parse(target);
  harness::ScaledClock clock(scale);
  std::map<std::string, std::uint64_t> seqs;
  for (Timestamp t = 0; t <= sc.horizon_s && !g_stop; ++t) {
    std::this_thread::sleep_for(clock.until(t));
    std::vector<std::string> lines;
    for (const auto& spec : sc.sensors) {
      auto& seq = seqs[spec.sensor_id];
      if (auto rec = sensors::generate_sample(spec, sc.gateway.elder_id, t, seq + 1)) {
        ++seq;
        lines.push_back(protocol::encode_record_line(*rec));
      }
    }
    if (!lines.empty()) net::send_lines(to, lines);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iCare telemonitoring: scenario runner and component services"};
  app.require_subcommand(1);

  std::string scenario, report, log_path, http = "127.0.0.1:8080";
  bool live = false;
  double scale = 1.0;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--report", report, "Write the JSON report here");
  run->add_option("--log", log_path, "Write the event log (JSON lines) here");
  run->add_flag("--live", live, "Wall clock and real sockets instead of virtual time");
  run->add_option("--time-scale", scale, "Live mode: clock seconds per wall second")->check(CLI::PositiveNumber);
  run->add_option("--http", http, "Live mode: server API listen address");

  std::string demo_name;
  bool list = false;
  auto* demo = app.add_subcommand("demo", "Run a shipped scenario by name");
  demo->add_option("name", demo_name, "Scenario name");
  demo->add_flag("--list", list, "List shipped scenarios");
  demo->add_option("--report", report, "Write the JSON report here");
  demo->add_option("--log", log_path, "Write the event log here");

  std::string config;
  auto* srv = app.add_subcommand("server", "Serve the health information server");
  srv->add_option("--config", config, "Server config file")->required();

  std::string sms = "127.0.0.1:9300", ec_http = "127.0.0.1:8081", audit;
  auto* ec = app.add_subcommand("emergency", "Serve the emergency centre");
  ec->add_option("--sms", sms, "ALARM line intake address");
  ec->add_option("--http", ec_http, "Dispatch query address");
  ec->add_option("--audit", audit, "Append the audit log to this file");

  std::string mode = "live";
  auto* gw = app.add_subcommand("gateway", "Run a gateway");
  gw->add_option("--config", config, "Gateway config file")->required();
  gw->add_option("--mode", mode, "live: sockets and wall clock; sim: commands on stdin")
      ->check(CLI::IsMember({"live", "sim"}));
  gw->add_option("--time-scale", scale, "Clock seconds per wall second")->check(CLI::PositiveNumber);

  std::string emit = "stdout";
  auto* sen = app.add_subcommand("sensors", "Emit a scenario's sensor samples as record lines");
  sen->add_option("--scenario", scenario, "Scenario file")->required();
  sen->add_option("--emit", emit, "stdout, or host:port of a gateway sensor listener");
  sen->add_option("--time-scale", scale, "Clock seconds per wall second")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      write_report(run_file(scenario, log_path, live, scale, http), report);
    } else if (*demo) {
      if (list || demo_name.empty()) {
        for (const auto& n : harness::shipped_scenarios()) std::cout << n << "\n";
        return 0;
      }
      write_report(run_file(harness::find_scenario(demo_name), log_path, false, 1.0, http), report);
    } else if (*srv) {
      return serve_server(config);
    } else if (*ec) {
      return serve_emergency(sms, ec_http, audit);
    } else if (*gw) {
      if (mode == "sim") return gateway_sim(gateway::load_gateway_config(config));
      return gateway_live(config, scale);
    } else if (*sen) {
      return emit_sensors(scenario, emit, scale);
    }
  } catch (const std::exception& e) {
    std::cerr << "icare: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
