#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "swarmsim/runner.hpp"
#include "swarmsim/world.hpp"
#include "test_util.hpp"

using namespace swarmsim;
using swarmsim::testutil::tiny_config;

TEST_CASE("zero-jitter symmetric link yields exactly 23.6 ms round trips") {
  ScenarioConfig cfg = tiny_config();
  cfg.link_profiles[0] = LinkProfile{"fast", 11'800, 0.0, 0.0, 0.0, 0.0};
  EchoBenchSpec bench;
  bench.name = "exact";
  bench.target = "percy";
  bench.payload_bytes = 50;
  bench.count = 10;
  bench.start_us = 100'000;
  cfg.workload.echo_benchmarks.push_back(bench);
  cfg.duration_us = 3'000'000;

  World world(cfg);
  world.init();
  world.run();
  REQUIRE(world.echo_benches.size() == 1);
  const EchoBenchState& result = world.echo_benches[0];
  CHECK(result.samples.size() == 10);
  CHECK(result.timeouts == 0);
  for (Micros rtt : result.samples) CHECK(rtt == 23'600);
}

TEST_CASE("echo benchmark with zero probes finishes with an empty sample list") {
  ScenarioConfig cfg = tiny_config();
  EchoBenchSpec bench;
  bench.name = "empty";
  bench.target = "percy";
  bench.count = 0;
  bench.start_us = 100'000;
  cfg.workload.echo_benchmarks.push_back(bench);
  World world(cfg);
  world.init();
  world.run();
  CHECK(world.echo_benches[0].samples.empty());
  CHECK(world.echo_benches[0].finished);
}

TEST_CASE("a silent target produces timeouts, still a valid result") {
  ScenarioConfig cfg = tiny_config();
  EchoBenchSpec bench;
  bench.name = "silent";
  bench.target = "percy";
  bench.count = 3;
  bench.timeout_us = 50'000;
  bench.start_us = 100'000;
  cfg.workload.echo_benchmarks.push_back(bench);
  cfg.duration_us = 2'000'000;

  World world(cfg);
  world.init();
  // Park the target before the bench starts: probes are never delivered.
  world.disconnect_session(world.find_agent("percy")->session);
  world.run();
  CHECK(world.echo_benches[0].samples.empty());
  CHECK(world.echo_benches[0].timeouts == 3);
}

TEST_CASE("heartbeat cadence: 500 ms interval over 10 s yields 20 beats") {
  ScenarioConfig cfg = tiny_config();
  cfg.duration_us = 10'000'000;
  for (auto& a : cfg.agents) a.heartbeat_interval_us = 500'000;
  World world(cfg);
  world.init();
  world.run();
  for (const auto& [id, agent] : world.agents) {
    CHECK(agent.heartbeats_attempted == 20);
  }
  // All of them reached the broker.
  std::map<std::string, std::size_t> beats;
  for (const auto& e : world.publish_log) {
    if (e.record.msg_type == MsgType::heartbeat && e.record.accepted) {
      beats[*e.record.sender] += 1;
    }
  }
  for (const auto& [id, n] : beats) CHECK(n == 20);
}

TEST_CASE("a mid-run partition opens a heartbeat gap of three-plus beats") {
  ScenarioConfig cfg = tiny_config();
  cfg.duration_us = 10'000'000;
  PartitionSpec part;
  part.link = "fast";
  part.start_us = 3'000'000;
  part.duration_us = 2'000'000;
  cfg.partitions.push_back(part);
  // Give the monitor its own link so only the agents are cut off.
  cfg.link_profiles.push_back(LinkProfile{"monitor-lan", 500, 0, 0, 0, 0});
  cfg.monitor_link = "monitor-lan";

  World world(cfg);
  world.init();
  world.run();

  const AgentRuntime& percy = *world.find_agent("percy");
  CHECK(percy.heartbeats_attempted == 20);
  std::size_t delivered = 0;
  for (const auto& e : world.publish_log) {
    if (e.record.msg_type == MsgType::heartbeat && e.record.accepted &&
        *e.record.sender == "percy") {
      ++delivered;
    }
  }
  // 2 s partition at 500 ms cadence swallows at least 3 beats.
  CHECK(delivered <= 20 - 3);
  std::size_t missed_heartbeats = 0;
  for (const auto& m : world.missed) {
    if (m.topic == "agents/broadcast") ++missed_heartbeats;
  }
  CHECK(missed_heartbeats >= 3);
}

TEST_CASE("publish to a parked subscriber is recorded as missed") {
  ScenarioConfig cfg = tiny_config();
  ExplicitCommand cmd;
  cmd.at_us = 500'000;
  cmd.device = "front_door";
  cmd.action = "lock";
  cfg.workload.commands.push_back(cmd);
  World world(cfg);
  world.init();
  world.disconnect_session(world.find_agent("jeeves")->session);
  world.run();
  CHECK(world.actuations.empty());
  bool missed_inbox = false;
  for (const auto& m : world.missed) {
    if (m.topic == "agents/inbox/jeeves" && m.why == "parked") missed_inbox = true;
  }
  CHECK(missed_inbox);
}

TEST_CASE("reconnect restores the identical subscription set after the delay") {
  ScenarioConfig cfg = tiny_config();
  cfg.reconnect.base_delay_us = 9'300;
  World world(cfg);
  world.init();

  const SessionId percy = world.find_agent("percy")->session;
  const auto subs_before = world.broker.session(percy)->subs;
  world.disconnect_session(percy);
  CHECK(world.broker.session(percy)->parked);
  const Micros delay = world.reconnect_session(percy);
  CHECK(delay == 9'300);  // zero-jitter reconnect profile
  world.run_until(world.clock.now_us + delay + 1);
  CHECK(!world.broker.session(percy)->parked);
  CHECK(world.broker.session(percy)->subs.size() == subs_before.size());
  for (const auto& [id, sub] : subs_before) {
    CHECK(world.broker.session(percy)->subs.count(id) == 1);
  }
  CHECK_THROWS(world.reconnect_session(9999));
}

TEST_CASE("command to the bridge actuates after the device duration") {
  ScenarioConfig cfg = tiny_config();
  ExplicitCommand cmd;
  cmd.at_us = 500'000;
  cmd.device = "front_door";
  cmd.action = "lock";
  cfg.workload.commands.push_back(cmd);
  World world(cfg);
  world.init();
  world.run();

  REQUIRE(world.actuations.size() == 1);
  const ActuationRecord& act = world.actuations[0];
  CHECK(act.complete_us - act.start_us == 500'000);  // lock duration
  CHECK(act.audited);
  CHECK(act.issued_by == std::string("rupert"));
  CHECK(world.devices.at("front_door").state == "locked");

  // Audit published at execution start: its broker timestamp precedes
  // physical completion by the full actuation duration minus transit.
  REQUIRE(world.audit_visibility_us(*act.corr_id).has_value());
  CHECK(*world.audit_visibility_us(*act.corr_id) < act.complete_us);
}

TEST_CASE("command for a nonexistent device publishes an error status") {
  ScenarioConfig cfg = tiny_config();
  ExplicitCommand cmd;
  cmd.at_us = 500'000;
  cmd.device = "front_door";
  cmd.action = "lock";
  cfg.workload.commands.push_back(cmd);
  World world(cfg);
  world.init();
  world.devices.clear();  // no devices registered at the bridge
  world.run();

  CHECK(world.actuations.empty());
  bool error_status = false;
  for (const auto& m : world.mirror_log) {
    if (m.decode_ok && m.env.msg_type == MsgType::status) {
      auto fields = parse_payload(m.env.payload);
      if (fields && fields->count("error") &&
          fields->at("error") == "unknown_device") {
        error_status = true;
      }
    }
  }
  CHECK(error_status);
}

TEST_CASE("mirror completeness: accepted publishes equal mirror receipts") {
  ScenarioConfig cfg = tiny_config();
  CommandLoad load;
  load.n = 25;
  load.start_us = 200'000;
  load.interval_us = 50'000;
  cfg.workload.command_load = load;
  StatusLoad chatter;
  chatter.n = 10;
  chatter.start_us = 300'000;
  cfg.workload.status_load = chatter;
  cfg.duration_us = 8'000'000;

  World world(cfg);
  world.init();
  world.run();

  std::size_t accepted = 0;
  for (const auto& e : world.publish_log) {
    if (e.record.accepted) ++accepted;
  }
  CHECK(accepted > 0);
  CHECK(world.mirror_log.size() == accepted);
}

TEST_CASE("per-topic delivery order equals publish acceptance order") {
  ScenarioConfig cfg = tiny_config();
  // Jitter makes per-delivery latencies non-monotone; FIFO clamping must
  // still deliver in acceptance order.
  cfg.link_profiles[0] = LinkProfile{"fast", 2'000, 500.0, 1.0, 0.0, 0.0};
  StatusLoad chatter;
  chatter.n = 40;
  chatter.start_us = 100'000;
  chatter.interval_us = 300;  // dense enough for reordering pressure
  cfg.workload.status_load = chatter;
  cfg.duration_us = 5'000'000;

  World world(cfg);
  world.init();
  world.run();

  // Reconstruct acceptance order per topic from the publish log and compare
  // with monitor mirror receipts (one per accepted publish, same order).
  std::map<std::string, std::vector<std::string>> accepted, mirrored;
  for (const auto& e : world.publish_log) {
    if (e.record.accepted && e.record.corr_id) {
      accepted[e.record.topic].push_back(*e.record.corr_id);
    }
  }
  for (const auto& m : world.mirror_log) {
    if (m.decode_ok && m.env.correlation_id) {
      mirrored[m.orig_topic].push_back(m.env.correlation_id->hex);
    }
  }
  CHECK(accepted == mirrored);
}

TEST_CASE("trace determinism: identical config and seed, identical trace") {
  const ScenarioConfig cfg =
      testutil::load_scenario("determinism-mini.json");
  World a(cfg), b(cfg);
  a.init();
  b.init();
  a.run();
  b.run();
  CHECK(trace_to_string(a) == trace_to_string(b));
  CHECK(!a.trace.empty());
}

TEST_CASE("different seeds diverge") {
  ScenarioConfig cfg = testutil::load_scenario("determinism-mini.json");
  World a(cfg);
  cfg.seed += 1;
  World b(cfg);
  a.init();
  b.init();
  a.run();
  b.run();
  CHECK(trace_to_string(a) != trace_to_string(b));
}

TEST_CASE("golden trace regression for the mini scenario") {
  const ScenarioConfig cfg =
      testutil::load_scenario("determinism-mini.json");
  World world(cfg);
  world.init();
  world.run();
  const std::string golden =
      testutil::slurp(testutil::golden_path("determinism-mini.trace"));
  REQUIRE(!golden.empty());
  CHECK(trace_to_string(world) == golden);
}

TEST_CASE("partition blackout decomposes additively to the microsecond") {
  const ScenarioConfig cfg = testutil::load_scenario("failover-bench.json");
  World world(cfg);
  world.init();
  world.run();

  REQUIRE(world.failover_rows.size() == 1);
  const FailoverRow& row = world.failover_rows[0];
  CHECK(row.principal == "jeeves");
  CHECK(row.blackout_us == row.spec.duration_us + row.spec.network_recovery_us +
                               row.spec.bridge_setup_us + row.reconnect_delay_us);
  CHECK(row.blackout_us == 35'709'300);

  // The safety command actuated during the blackout with its audit record
  // deferred past physical completion.
  REQUIRE(world.actuations.size() == 1);
  const ActuationRecord& act = world.actuations[0];
  const auto vis = world.audit_visibility_us(*act.corr_id);
  REQUIRE(vis.has_value());
  CHECK(*vis > act.complete_us);

  // Actuation-to-audit gap exceeds the blackout itself.
  const Micros publish_us = world.issued_commands.at(0).publish_us;
  CHECK(*vis - publish_us > row.blackout_us);
}

TEST_CASE("messages in flight when the partition hits are dropped") {
  ScenarioConfig cfg = tiny_config();
  cfg.link_profiles[0] = LinkProfile{"fast", 20'000, 0.0, 0.0, 0.0, 0.0};
  cfg.link_profiles.push_back(LinkProfile{"monitor-lan", 500, 0, 0, 0, 0});
  cfg.monitor_link = "monitor-lan";
  StatusLoad chatter;
  chatter.n = 1;
  chatter.start_us = 995'000;  // downlink in flight at partition start
  cfg.workload.status_load = chatter;
  PartitionSpec part;
  part.link = "fast";
  part.start_us = 1'000'000;
  part.duration_us = 1'000'000;
  cfg.partitions.push_back(part);
  cfg.duration_us = 5'000'000;

  World world(cfg);
  world.init();
  world.run();
  bool dropped = false;
  for (const auto& m : world.missed) {
    if (m.why == "partition" || m.why == "parked") dropped = true;
  }
  CHECK(dropped);
}

TEST_CASE("operations count excludes heartbeats") {
  ScenarioConfig cfg = tiny_config();
  StatusLoad chatter;
  chatter.n = 7;
  chatter.start_us = 100'000;
  cfg.workload.status_load = chatter;
  cfg.duration_us = 3'000'000;
  World world(cfg);
  world.init();
  world.run();
  CHECK(world.operations() == 7);
}
