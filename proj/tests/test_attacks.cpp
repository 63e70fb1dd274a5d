#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "swarmsim/attacks.hpp"
#include "test_util.hpp"

using namespace swarmsim;

namespace {

std::string outcome_signature(const std::vector<AttackOutcome>& outcomes) {
  std::ostringstream out;
  for (const auto& o : outcomes) {
    out << to_string(o.kind) << "|" << o.broker_response << "|" << o.executions
        << "|" << o.audit_records << "|" << o.impact;
    for (const auto& [k, v] : o.evidence) out << "|" << k << "=" << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("suite covers every attack kind in enum order") {
  const ScenarioConfig cfg =
      testutil::load_scenario("baseline-attack-suite.json");
  const auto outcomes = run_suite(cfg);
  REQUIRE(outcomes.size() == std::size(kAllAttackKinds));
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    CHECK(outcomes[i].kind == kAllAttackKinds[i]);
    CHECK(outcomes[i].attempted);
  }
}

TEST_CASE("baseline and hardened duality per attack kind") {
  const ScenarioConfig baseline =
      testutil::load_scenario("baseline-attack-suite.json");
  const ScenarioConfig hardened =
      testutil::load_scenario("hardened-attack-suite.json");
  const auto base = run_suite(baseline);
  const auto hard = run_suite(hardened);

  // The four provenance probes flip from accepted to rejected with four
  // distinct rejection reasons.
  std::set<RejectReason> reasons;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(base[i].accepted);
    CHECK(!hard[i].accepted);
    REQUIRE(hard[i].reject_reason.has_value());
    reasons.insert(*hard[i].reject_reason);
    CHECK(hard[i].executions == (hard[i].kind == AttackKind::Replay ? 1 : 0));
  }
  CHECK(reasons.size() == 4);

  SUBCASE("replay re-executes the device in baseline only") {
    const AttackOutcome& replay = base[2];
    CHECK(replay.kind == AttackKind::Replay);
    CHECK(replay.executions == 2);      // legit + replayed
    CHECK(replay.audit_records == 2);   // both share one correlation id
    CHECK(hard[2].executions == 1);     // only the legitimate command ran
  }
  SUBCASE("direct safety publish bypasses the audit path in baseline") {
    const AttackOutcome& direct = base[3];
    CHECK(direct.kind == AttackKind::DirectSafetyPublish);
    CHECK(direct.executions == 1);
    CHECK(direct.audit_records == 0);
  }
  SUBCASE("missing sender executes untraceably in baseline") {
    CHECK(base[0].executions == 1);
    CHECK(base[0].impact == "Untraceable command");
  }
  SUBCASE("state drift: embedded diverges silently, state plane detects") {
    const AttackOutcome& drift_b = base[4];
    const AttackOutcome& drift_h = hard[4];
    CHECK(drift_b.evidence.at("divergent_copies") == "2");
    CHECK(drift_b.evidence.at("conflict_events") == "0");
    CHECK(drift_h.evidence.at("divergent_copies") == "1");
    CHECK(drift_h.evidence.at("conflict_events") == "1");
  }
  SUBCASE("forged flood locks out the operator in baseline only") {
    CHECK(base[5].evidence.at("legit_command_obeyed") == "no");
    CHECK(base[5].evidence.at("oob_required") == "yes");
    CHECK(base[5].evidence.at("obeyed_after_oob") == "yes");
    CHECK(std::stoll(base[5].evidence.at("lockout_us")) > 0);
    CHECK(hard[5].evidence.at("legit_command_obeyed") == "yes");
    CHECK(hard[5].evidence.at("refused_verified") == "0");
    CHECK(hard[5].evidence.at("lockout_us") == "0");
  }
  SUBCASE("induced fallback: silent in baseline, marked in hardened") {
    CHECK(base[6].evidence.at("egress_entries") == "1");
    CHECK(base[6].evidence.at("dns_events") == "10");
    CHECK(base[6].evidence.at("audit_markers") == "0");
    CHECK(base[6].evidence.at("coordination_anomalies") == "0");
    CHECK(hard[6].evidence.at("audit_markers") ==
          hard[6].evidence.at("egress_entries"));
  }
  SUBCASE("partition blackout matches the netsim decomposition exactly") {
    for (const auto* o : {&base[7], &hard[7]}) {
      CHECK(o->evidence.at("unaudited_actuations") == "1");
      // 2 s + 33.6 s + 0.1 s + 9.3 ms
      CHECK(o->evidence.at("blackout_us") == "35709300");
      CHECK(std::stoll(o->evidence.at("audit_gap_us")) > 35'709'300);
    }
  }
}

TEST_CASE("suite is deterministic for a fixed seed") {
  const ScenarioConfig cfg =
      testutil::load_scenario("baseline-attack-suite.json");
  const std::string a = outcome_signature(run_suite(cfg));
  const std::string b = outcome_signature(run_suite(cfg));
  CHECK(a == b);
}

TEST_CASE("run_attack rejects nothing it should not: cooperative world unharmed") {
  // MissingSender in hardened mode leaves zero actuations and a rejected
  // publish, nothing else.
  const ScenarioConfig cfg =
      testutil::load_scenario("hardened-attack-suite.json");
  const AttackOutcome out =
      run_attack(cfg, suite_defaults(cfg, AttackKind::MissingSender));
  CHECK(!out.accepted);
  CHECK(out.reject_reason == RejectReason::missing_field);
  CHECK(out.executions == 0);
  CHECK(out.audit_records == 0);
}

TEST_CASE("rogue mirror subscription: granted in baseline, denied hardened") {
  const ScenarioConfig baseline =
      testutil::load_scenario("baseline-attack-suite.json");
  const ScenarioConfig hardened =
      testutil::load_scenario("hardened-attack-suite.json");
  const AttackOutcome base =
      run_attack(baseline, suite_defaults(baseline, AttackKind::Replay));
  const AttackOutcome hard =
      run_attack(hardened, suite_defaults(hardened, AttackKind::Replay));
  CHECK(base.evidence.at("mirror_capture") == "granted");
  CHECK(hard.evidence.at("mirror_capture") == "denied");
}
