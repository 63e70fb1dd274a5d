#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsim/broker.hpp"
#include "swarmsim/netsim.hpp"
#include "swarmsim/sovereignty.hpp"
#include "swarmsim/trust.hpp"

namespace swarmsim {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Archetype { cloud_hosted, edge_local, hybrid };
const char* to_string(Archetype a);

enum class Role { orchestrator, mobile, bridge };
const char* to_string(Role r);

enum class SigningMode { follow_posture, on, off };

enum class StateMode { embedded, state_plane };
const char* to_string(StateMode m);

struct InferenceSpec {
  std::size_t local_capacity_bytes = 64 * 1024;  // 0 = no local endpoint
  std::optional<std::string> cloud_host;         // absent = no cloud endpoint
};

struct AgentSpec {
  AgentId id;
  Role role = Role::mobile;
  std::string link;
  Micros heartbeat_interval_us = 500'000;
  std::optional<std::string> key_id;
  InferenceSpec inference;
};

enum class DeviceKind { lock, light, smart_switch, sensor, valve, relay };
const char* to_string(DeviceKind k);
std::optional<DeviceKind> device_kind_from_string(std::string_view s);
Micros default_actuation_duration(DeviceKind k);
const char* default_initial_state(DeviceKind k);

struct DeviceSpec {
  std::string id;
  DeviceKind kind = DeviceKind::light;
  Micros actuation_duration_us = 0;  // 0 -> kind default
  std::string initial_state;         // empty -> kind default
};

struct ReconnectProfile {
  Micros base_delay_us = 9'300;
  double jitter_median_us = 0.0;
  double jitter_sigma = 0.0;
};

struct TrustConfig {
  std::size_t distrust_threshold = 5;
  Micros oob_response_delay_us = 60'000'000;
};

struct DnsConfig {
  unsigned retry_count = 10;
  Micros retry_interval_us = 1'000;
  std::map<std::string, std::string> hosts;  // hostname -> fixed address
};

struct CommandLoad {
  std::size_t n = 0;
  Micros start_us = 1'000'000;
  Micros interval_us = 50'000;
  std::string issuer;                     // empty -> orchestrator
  std::vector<std::string> devices;       // empty -> cycle all actuatable
  std::vector<std::string> action_types;  // empty -> default five
};

struct SensorLoad {
  std::size_t n = 0;
  Micros start_us = 1'000'000;
  Micros interval_us = 20'000;
  std::vector<std::string> devices;  // empty -> all sensors
};

struct StatusLoad {
  std::size_t n = 0;
  Micros start_us = 1'000'000;
  Micros interval_us = 100'000;
};

struct EchoBenchSpec {
  std::string name;  // report label; default "<payload>B"
  std::string target;
  std::size_t payload_bytes = 50;
  std::size_t count = 150;
  Micros timeout_us = 5'000'000;
  Micros start_us = 1'000'000;
};

struct InferenceRequest {
  Micros at_us = 1'000'000;
  std::string agent;
  std::size_t request_bytes = 0;
  std::string label;
};

struct ExplicitCommand {
  Micros at_us = 0;
  std::string issuer;
  std::string device;
  std::string action;
};

struct Workload {
  std::optional<CommandLoad> command_load;
  std::optional<SensorLoad> sensor_load;
  std::optional<StatusLoad> status_load;
  std::vector<EchoBenchSpec> echo_benchmarks;
  std::vector<InferenceRequest> inference_requests;
  std::vector<ExplicitCommand> commands;
};

enum class AttackKind {
  MissingSender,
  SpoofedSender,
  Replay,
  DirectSafetyPublish,
  EmbeddedStateDrift,
  ForgedFlood,
  InducedFallback,
  PartitionBlackout,
};

inline constexpr AttackKind kAllAttackKinds[] = {
    AttackKind::MissingSender,      AttackKind::SpoofedSender,
    AttackKind::Replay,             AttackKind::DirectSafetyPublish,
    AttackKind::EmbeddedStateDrift, AttackKind::ForgedFlood,
    AttackKind::InducedFallback,    AttackKind::PartitionBlackout,
};

const char* to_string(AttackKind k);
// Human table row label, matching the adversarial-table naming.
const char* attack_label(AttackKind k);
std::optional<AttackKind> attack_kind_from_string(std::string_view s);

struct AttackSpec {
  AttackKind kind = AttackKind::MissingSender;
  Micros at_us = 2'000'000;
  std::string device;         // S1a targets; empty -> first lock-like device
  std::string action;         // empty -> "unlock"
  std::string claim;          // spoofed/flood claimed sender; empty -> orchestrator
  std::size_t flood_k = 20;
  Micros flood_spacing_us = 10'000;
  std::string agent;          // fallback target; empty -> first mobile agent
  std::size_t request_bytes = 111'616;  // 109 KiB
  std::string label;
  std::string doc = "shared-plan";
  std::string content = "phase one: observe. phase two: actuate.";
  std::string link;           // partition target; empty -> bridge link
  Micros lead_us = 1'000;
  Micros duration_us = 2'000'000;
  Micros network_recovery_us = 33'600'000;
  Micros bridge_setup_us = 100'000;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Archetype archetype = Archetype::edge_local;
  std::uint64_t seed = 1;
  Micros duration_us = 10'000'000;
  BrokerMode posture = BrokerMode::baseline;
  TrustMode trust_mode = TrustMode::baseline;
  SigningMode signing = SigningMode::follow_posture;
  StateMode state_mode = StateMode::embedded;
  BoundaryPolicy boundary;
  TrustConfig trust;
  std::vector<LinkProfile> link_profiles;
  ReconnectProfile reconnect;
  std::string monitor_link;  // empty -> orchestrator's link
  std::vector<AgentSpec> agents;
  std::vector<DeviceSpec> devices;
  DnsConfig dns;
  Keystore keystore;
  Acl acl;
  Workload workload;
  std::vector<PartitionSpec> partitions;
  std::vector<AttackSpec> attacks;
  std::size_t max_payload_bytes = kDefaultMaxPayloadBytes;

  bool signing_enabled() const {
    if (signing == SigningMode::on) return true;
    if (signing == SigningMode::off) return false;
    return posture == BrokerMode::hardened;
  }
  const AgentSpec* orchestrator() const;
  const AgentSpec* agent(const std::string& id) const;
  const AgentSpec* first_with_role(Role r) const;
  const LinkProfile* profile(const std::string& name) const;
  const DeviceSpec* device(const std::string& id) const;
  Micros device_duration(const DeviceSpec& d) const {
    return d.actuation_duration_us ? d.actuation_duration_us
                                   : default_actuation_duration(d.kind);
  }
};

struct ValidationError {
  std::string path;
  std::string message;
};

std::vector<ValidationError> validate(const ScenarioConfig& cfg);

// Strict parse: unknown keys anywhere are errors (fail-closed).
// base_dir resolves relative keystore_file / acl_file references.
ScenarioConfig parse_scenario(const std::string& text,
                              const std::string& base_dir);
ScenarioConfig load_scenario_file(const std::string& path);

std::string read_file(const std::string& path);  // throws ScenarioError

}  // namespace swarmsim
