#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarmsim/report.hpp"
#include "swarmsim/rng.hpp"
#include "test_util.hpp"

using namespace swarmsim;

namespace {

World run_world(const ScenarioConfig& cfg) {
  World world(cfg);
  world.init();
  world.run();
  return world;
}

}  // namespace

TEST_CASE("rendering the same run twice is byte-identical") {
  const World world = run_world(testutil::load_scenario("determinism-mini.json"));
  const nlohmann::json a = build_report(world);
  const nlohmann::json b = build_report(world);
  CHECK(a.dump() == b.dump());
  CHECK(render_text(a) == render_text(b));
}

TEST_CASE("attack-suite rows carry the canonical labels") {
  CHECK(std::string(attack_label(AttackKind::MissingSender)) ==
        "Missing sender field");
  CHECK(std::string(attack_label(AttackKind::SpoofedSender)) == "Spoofed sender");
  CHECK(std::string(attack_label(AttackKind::Replay)) == "Replayed message");
  CHECK(std::string(attack_label(AttackKind::DirectSafetyPublish)) ==
        "Direct safety publish");
}

TEST_CASE("an empty run renders explicit no-data sections") {
  ScenarioConfig cfg = testutil::tiny_config();
  cfg.duration_us = 1'000;  // ends before the first heartbeat
  const World world = run_world(cfg);
  const nlohmann::json report = build_report(world);
  const std::string text = render_text(report);
  CHECK(text.find("(no data") != std::string::npos);
  CHECK(report.at("provenance").at("n_messages").get<std::size_t>() == 0);
  CHECK(report.at("latency").empty());
}

TEST_CASE("provenance audit over a mirror log") {
  std::vector<MirrorReceipt> log;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    MirrorReceipt m;
    m.decode_ok = true;
    m.env.msg_type = MsgType::command;
    m.env.sender = AgentId{"rupert"};
    m.env.correlation_id = CorrelationId::generate(rng);
    m.env.payload = make_raw_payload({{"action", "lock"}, {"device", "d"}});
    log.push_back(std::move(m));
  }
  SUBCASE("cooperative stream is fully covered") {
    const ProvenanceAudit audit = provenance_audit(log);
    CHECK(audit.n_messages == 100);
    CHECK(audit.complete());
  }
  SUBCASE("one anonymous command among 101 drops sender coverage to 100/101") {
    MirrorReceipt anon;
    anon.decode_ok = true;
    anon.env.msg_type = MsgType::command;
    anon.env.correlation_id = CorrelationId::generate(rng);
    anon.env.payload = make_raw_payload({{"action", "lock"}});
    log.push_back(std::move(anon));
    const ProvenanceAudit audit = provenance_audit(log);
    CHECK(audit.n_messages == 101);
    CHECK(audit.sender == doctest::Approx(100.0 / 101.0));
    CHECK(audit.timestamp == 1.0);
    CHECK(!audit.complete());
  }
  SUBCASE("empty log is vacuously complete with n flagged as zero") {
    const ProvenanceAudit audit = provenance_audit({});
    CHECK(audit.n_messages == 0);
    CHECK(audit.complete());
  }
}

TEST_CASE("formatting helpers are stable") {
  CHECK(format_ms(23'600) == "23.6 ms");
  CHECK(format_ms(9'300) == "9.3 ms");
  CHECK(format_seconds(35'709'300) == "35.709 s");
  CHECK(format_pct(1.0) == "100.0%");
  CHECK(format_pct(100.0 / 101.0) == "99.0%");
}

TEST_CASE("zero-egress property: randomized attack-free edge workloads") {
  Rng rng(404);
  for (int trial = 0; trial < 8; ++trial) {
    ScenarioConfig cfg = testutil::tiny_config();
    cfg.seed = 1000 + trial;
    cfg.duration_us = 4'000'000;
    CommandLoad commands;
    commands.n = rng.next_below(20);
    commands.start_us = 200'000;
    commands.interval_us = 20'000 + rng.next_below(50'000);
    cfg.workload.command_load = commands;
    StatusLoad chatter;
    chatter.n = rng.next_below(20);
    chatter.start_us = 150'000;
    cfg.workload.status_load = chatter;
    if (rng.next_bool(0.5)) {
      EchoBenchSpec bench;
      bench.name = "p";
      bench.target = "percy";
      bench.count = rng.next_below(10);
      bench.start_us = 100'000;
      cfg.workload.echo_benchmarks.push_back(bench);
    }
    const World world = run_world(cfg);
    CHECK(world.ledger.entries.empty());
    CHECK(world.dns_log.empty());
    const nlohmann::json report = build_report(world);
    CHECK(report.at("egress").at("total_bytes").get<std::size_t>() == 0);
    CHECK(report.at("egress").at("external_destinations").get<std::size_t>() == 0);
  }
}
