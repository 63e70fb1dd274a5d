#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/scenario.hpp"
#include "swarmsim/world.hpp"

namespace swarmsim {

struct AttackOutcome {
  AttackKind kind = AttackKind::MissingSender;
  std::string label;          // human table row label
  bool attempted = false;
  bool accepted = false;      // primary attack publish accepted by the broker
  std::string broker_response;  // "Accepted" or "Rejected (reason)"
  std::optional<RejectReason> reject_reason;
  std::size_t executions = 0;     // actuations the attack triggered
  std::size_t audit_records = 0;  // audit records correlated with the attack
  std::size_t detections = 0;     // trust/conflict detections
  std::string impact;             // one-line consequence summary
  std::map<std::string, std::string> evidence;
};

// Extract the structured outcome for one scripted attack after the world
// has run to completion.
AttackOutcome extract_outcome(const World& world, const AttackRuntime& rt);

// Build a fresh world from the config with exactly this attack installed,
// run it to the configured duration, and report the outcome.
AttackOutcome run_attack(const ScenarioConfig& cfg, const AttackSpec& spec);

// All attack kinds with per-kind defaults, in enum order, each against a
// fresh world. The returned table is deterministic for a given config.
std::vector<AttackOutcome> run_suite(const ScenarioConfig& cfg);

// Per-kind parameter defaults resolved against a config (target device,
// claimed sender, partition link).
AttackSpec suite_defaults(const ScenarioConfig& cfg, AttackKind kind);

}  // namespace swarmsim
