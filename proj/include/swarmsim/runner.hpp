#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "swarmsim/scenario.hpp"
#include "swarmsim/world.hpp"

namespace swarmsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunArtifacts {
  std::string out_dir;
  nlohmann::json report;
  nlohmann::json manifest;
};

std::string trace_to_string(const World& world);

// Executes a validated config and writes trace.log, report.json, report.txt,
// egress.jsonl, dns.jsonl and manifest.json under out_dir. Nothing is
// written anywhere else.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                          const std::string& config_digest);

}  // namespace swarmsim
