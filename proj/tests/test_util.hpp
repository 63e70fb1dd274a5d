#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "swarmsim/scenario.hpp"

#ifndef SWARMSIM_SCENARIO_DIR
#define SWARMSIM_SCENARIO_DIR "scenarios"
#endif
#ifndef SWARMSIM_GOLDEN_DIR
#define SWARMSIM_GOLDEN_DIR "tests/golden"
#endif

namespace swarmsim::testutil {

inline std::string scenario_path(const std::string& name) {
  return std::string(SWARMSIM_SCENARIO_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
  return std::string(SWARMSIM_GOLDEN_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline ScenarioConfig load_scenario(const std::string& name) {
  return load_scenario_file(scenario_path(name));
}

// Minimal two-node world config assembled in code for unit tests.
inline ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.name = "tiny";
  cfg.seed = 99;
  cfg.duration_us = 10'000'000;
  cfg.link_profiles.push_back(LinkProfile{"fast", 1'000, 0.0, 0.0, 0.0, 0.0});
  cfg.monitor_link = "fast";
  AgentSpec rupert;
  rupert.id = AgentId{"rupert"};
  rupert.role = Role::orchestrator;
  rupert.link = "fast";
  AgentSpec percy;
  percy.id = AgentId{"percy"};
  percy.role = Role::mobile;
  percy.link = "fast";
  AgentSpec jeeves;
  jeeves.id = AgentId{"jeeves"};
  jeeves.role = Role::bridge;
  jeeves.link = "fast";
  cfg.agents = {rupert, percy, jeeves};
  DeviceSpec lock;
  lock.id = "front_door";
  lock.kind = DeviceKind::lock;
  cfg.devices.push_back(lock);
  return cfg;
}

}  // namespace swarmsim::testutil
