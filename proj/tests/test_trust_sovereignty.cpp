#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarmsim/agents.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/sovereignty.hpp"
#include "swarmsim/trust.hpp"

using namespace swarmsim;

namespace {

Envelope command_claiming(const std::string& sender, const std::string& tag) {
  Envelope env;
  env.sender = AgentId{sender};
  env.msg_type = MsgType::command;
  env.timestamp_us = 1;
  env.correlation_id = CorrelationId{"000102030405060708090a0b0c0d0e0f"};
  env.payload = make_raw_payload({{"from", sender},
                                  {"tag", tag},
                                  {"device", "front_door"},
                                  {"action", "unlock"}});
  return env;
}

const VerificationResult kUnverified =
    VerificationResult::rejected(VerifyReason::missing_auth);

}  // namespace

TEST_CASE("baseline: flood of forgeries locks out later legitimate commands") {
  TrustState state;
  state.mode = TrustMode::baseline;
  state.distrust_threshold = 5;
  state.note_heartbeat("percy", "live-beacon");

  for (int i = 0; i < 20; ++i) {
    const auto verdict =
        assess(state, 1'000 + i, command_claiming("percy", "bogus"), kUnverified);
    CHECK(verdict == TrustVerdict::refuse);
  }
  CHECK(state.channel_distrust);
  CHECK(state.distrust_since == Micros{1'004});  // fifth forgery trips it

  // A legitimate operator command on the same channel is refused.
  const auto legit = command_claiming("operator", "x");
  CHECK(assess(state, 2'000, legit, kUnverified) == TrustVerdict::refuse);

  // Out-of-band confirmation resets the channel; the next command passes.
  oob_confirm(state, 3'000);
  CHECK(!state.channel_distrust);
  CHECK(assess(state, 3'100, legit, kUnverified) == TrustVerdict::accept);

  const LockoutReport report = lockout_report(state, 10'000);
  CHECK(report.lockout_us == 3'000 - 1'004);
  CHECK(report.refused_commands == 21);
}

TEST_CASE("baseline below threshold does not distrust the channel") {
  TrustState state;
  state.mode = TrustMode::baseline;
  state.distrust_threshold = 5;
  state.note_heartbeat("percy", "live-beacon");
  for (int i = 0; i < 4; ++i) {
    assess(state, i, command_claiming("percy", "bogus"), kUnverified);
  }
  CHECK(!state.channel_distrust);
  CHECK(assess(state, 99, command_claiming("operator", "x"), kUnverified) ==
        TrustVerdict::accept);
  CHECK(lockout_report(state, 1'000).lockout_us == 0);
}

TEST_CASE("hardened: forgeries quarantine individually, verified always accepted") {
  TrustState state;
  state.mode = TrustMode::hardened;
  state.note_heartbeat("percy", "live-beacon");

  for (int i = 0; i < 20; ++i) {
    CHECK(assess(state, i, command_claiming("percy", "bogus"), kUnverified) ==
          TrustVerdict::quarantine);
  }
  CHECK(state.quarantine.size() == 20);  // retained, none silently dropped
  CHECK(!state.channel_distrust);

  CHECK(assess(state, 100, command_claiming("percy", "live-beacon"),
               VerificationResult::ok()) == TrustVerdict::accept);
  CHECK(lockout_report(state, 1'000).refused_verified == 0);
  CHECK(lockout_report(state, 1'000).lockout_us == 0);
}

TEST_CASE("hardened: unverifiable but plausible requires out-of-band") {
  TrustState state;
  state.mode = TrustMode::hardened;
  state.note_heartbeat("percy", "live-beacon");
  // Consistent beacon, but no valid signature.
  CHECK(assess(state, 5, command_claiming("percy", "live-beacon"), kUnverified) ==
        TrustVerdict::require_oob);
  CHECK(state.pending_oob == 1);
  oob_confirm(state, 10);
  CHECK(state.pending_oob == 0);
}

TEST_CASE("senders without a heartbeat stream cannot be contradicted") {
  TrustState state;
  state.mode = TrustMode::baseline;
  CHECK(assess(state, 1, command_claiming("operator", "whatever"), kUnverified) ==
        TrustVerdict::accept);
  CHECK(state.forgery_count == 0);
}

TEST_CASE("lockout arithmetic: flood at 10s, reset at 70s -> 60s") {
  TrustState state;
  state.mode = TrustMode::baseline;
  state.distrust_threshold = 1;
  state.note_heartbeat("percy", "beacon");
  assess(state, 10'000'000, command_claiming("percy", "bogus"), kUnverified);
  CHECK(state.channel_distrust);
  oob_confirm(state, 70'000'000);
  CHECK(lockout_report(state, 99'000'000).lockout_us == 60'000'000);
}

TEST_CASE("authorize_egress decision table") {
  BoundaryPolicy forbid{CloudFallback::forbid, {}};
  BoundaryPolicy silent{CloudFallback::allow_silent, {}};
  BoundaryPolicy marked{CloudFallback::allow_with_marker, {}};
  BoundaryPolicy sensitive{CloudFallback::allow_silent, {"medical"}};

  CHECK(authorize_egress(forbid, "percy", "api.example", "x", 10) ==
        EgressDecision::deny);
  CHECK(authorize_egress(silent, "percy", "api.example", "x", 10) ==
        EgressDecision::allow);
  CHECK(authorize_egress(marked, "percy", "api.example", "x", 10) ==
        EgressDecision::allow_marked);
  CHECK(authorize_egress(sensitive, "percy", "api.example", "medical", 10) ==
        EgressDecision::deny);
  CHECK(authorize_egress(sensitive, "percy", "api.example", "other", 10) ==
        EgressDecision::allow);
}

TEST_CASE("egress ledger is append-only with positive byte counts") {
  EgressLedger ledger;
  CHECK_THROWS_AS(
      ledger.append(EgressEntry{1, "percy", "api.example", 0,
                                EgressCause::inference_fallback, false}),
      std::invalid_argument);
  ledger.append(EgressEntry{1, "percy", "api.example", 6'498,
                            EgressCause::cloud_api, false});
  ledger.append(EgressEntry{2, "percy", "api.example", 6'498,
                            EgressCause::cloud_api, false});
  CHECK(ledger.total_bytes() == 12'996);
  CHECK(ledger.destinations().size() == 1);
}

TEST_CASE("egress report sums are exact; ten calls of 6498 bytes") {
  EgressLedger ledger;
  std::vector<DnsEvent> dns;
  for (int i = 0; i < 10; ++i) {
    dns.push_back(DnsEvent{Micros(i), "rupert", "api.example", "160.79.104.10"});
    ledger.append(EgressEntry{Micros(i), "rupert", "api.example", 6'498,
                              EgressCause::cloud_api, false});
  }
  const EgressReport report = build_egress_report(ledger, dns, 10);
  CHECK(report.total_bytes == 64'980);  // 10 * 6498, exact arithmetic
  CHECK(report.external_destinations == 1);
  CHECK(report.external_ips == 1);
  REQUIRE(report.destinations.size() == 1);
  CHECK(report.destinations[0].dns_queries == 10);
  CHECK(report.operations == 10);
}

TEST_CASE("crossing detection classifies observation layers") {
  EgressLedger ledger;
  std::vector<DnsEvent> dns;
  dns.push_back(DnsEvent{100, "percy", "api.example", "160.79.104.10"});
  ledger.append(EgressEntry{200, "percy", "api.example", 111'616,
                            EgressCause::inference_fallback, false});
  ledger.append(EgressEntry{300, "percy", "api.example", 50'000,
                            EgressCause::inference_fallback, true});

  const auto crossings = detect_crossings(ledger, dns);
  REQUIRE(crossings.size() == 2);
  CHECK(crossings[0].dns_layer);
  CHECK(!crossings[0].audit_marker);
  CHECK(!crossings[0].coordination_layer);  // invisible on the bus
  CHECK(crossings[1].audit_marker);
  CHECK(detect_crossings({}, dns).empty());
}
