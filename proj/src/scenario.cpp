#include "swarmsim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace swarmsim {

using json = nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Archetype a) {
  switch (a) {
    case Archetype::cloud_hosted: return "cloud_hosted";
    case Archetype::edge_local: return "edge_local";
    case Archetype::hybrid: return "hybrid";
  }
  return "unknown";
}

const char* to_string(Role r) {
  switch (r) {
    case Role::orchestrator: return "orchestrator";
    case Role::mobile: return "mobile";
    case Role::bridge: return "bridge";
  }
  return "unknown";
}

const char* to_string(StateMode m) {
  return m == StateMode::embedded ? "embedded" : "state_plane";
}

const char* to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::lock: return "lock";
    case DeviceKind::light: return "light";
    case DeviceKind::smart_switch: return "switch";
    case DeviceKind::sensor: return "sensor";
    case DeviceKind::valve: return "valve";
    case DeviceKind::relay: return "relay";
  }
  return "unknown";
}

std::optional<DeviceKind> device_kind_from_string(std::string_view s) {
  if (s == "lock") return DeviceKind::lock;
  if (s == "light") return DeviceKind::light;
  if (s == "switch") return DeviceKind::smart_switch;
  if (s == "sensor") return DeviceKind::sensor;
  if (s == "valve") return DeviceKind::valve;
  if (s == "relay") return DeviceKind::relay;
  return std::nullopt;
}

Micros default_actuation_duration(DeviceKind k) {
  switch (k) {
    case DeviceKind::lock: return 500'000;
    case DeviceKind::valve: return 1'000'000;
    case DeviceKind::relay: return 5'000;
    case DeviceKind::light: return 150'000;
    case DeviceKind::smart_switch: return 100'000;
    case DeviceKind::sensor: return 0;
  }
  return 0;
}

const char* default_initial_state(DeviceKind k) {
  switch (k) {
    case DeviceKind::lock: return "locked";
    case DeviceKind::valve: return "closed";
    case DeviceKind::sensor: return "idle";
    default: return "off";
  }
}

const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::MissingSender: return "MissingSender";
    case AttackKind::SpoofedSender: return "SpoofedSender";
    case AttackKind::Replay: return "Replay";
    case AttackKind::DirectSafetyPublish: return "DirectSafetyPublish";
    case AttackKind::EmbeddedStateDrift: return "EmbeddedStateDrift";
    case AttackKind::ForgedFlood: return "ForgedFlood";
    case AttackKind::InducedFallback: return "InducedFallback";
    case AttackKind::PartitionBlackout: return "PartitionBlackout";
  }
  return "unknown";
}

const char* attack_label(AttackKind k) {
  switch (k) {
    case AttackKind::MissingSender: return "Missing sender field";
    case AttackKind::SpoofedSender: return "Spoofed sender";
    case AttackKind::Replay: return "Replayed message";
    case AttackKind::DirectSafetyPublish: return "Direct safety publish";
    case AttackKind::EmbeddedStateDrift: return "Embedded state drift";
    case AttackKind::ForgedFlood: return "Forged-message flood";
    case AttackKind::InducedFallback: return "Induced cloud fallback";
    case AttackKind::PartitionBlackout: return "Partition blackout";
  }
  return "unknown";
}

std::optional<AttackKind> attack_kind_from_string(std::string_view s) {
  for (AttackKind k : kAllAttackKinds) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

const AgentSpec* ScenarioConfig::orchestrator() const {
  return first_with_role(Role::orchestrator);
}

const AgentSpec* ScenarioConfig::agent(const std::string& id) const {
  for (const auto& a : agents) {
    if (a.id.id == id) return &a;
  }
  return nullptr;
}

const AgentSpec* ScenarioConfig::first_with_role(Role r) const {
  for (const auto& a : agents) {
    if (a.role == r) return &a;
  }
  return nullptr;
}

const LinkProfile* ScenarioConfig::profile(const std::string& name) const {
  for (const auto& p : link_profiles) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const DeviceSpec* ScenarioConfig::device(const std::string& id) const {
  for (const auto& d : devices) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError(path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  std::set<std::string_view> ok;
  for (const char* k : allowed) ok.insert(k);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) fail(path, "unknown key '" + it.key() + "'");
  }
}

const json& get_req(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing key '") + key + "'");
  return j[key];
}

std::string get_string(const json& j, const std::string& path, const char* key) {
  const json& v = get_req(j, path, key);
  if (!v.is_string()) fail(path + "." + key, "expected string");
  return v.get<std::string>();
}

std::string get_string_or(const json& j, const std::string& path,
                          const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) fail(path + "." + key, "expected string");
  return j[key].get<std::string>();
}

std::uint64_t get_uint(const json& j, const std::string& path, const char* key) {
  const json& v = get_req(j, path, key);
  if (!v.is_number_unsigned()) fail(path + "." + key, "expected non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint64_t get_uint_or(const json& j, const std::string& path,
                          const char* key, std::uint64_t def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_unsigned()) fail(path + "." + key, "expected non-negative integer");
  return j[key].get<std::uint64_t>();
}

double get_double_or(const json& j, const std::string& path, const char* key,
                     double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) fail(path + "." + key, "expected number");
  return j[key].get<double>();
}

std::vector<std::string> get_string_list_or(const json& j,
                                            const std::string& path,
                                            const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) fail(path + "." + key, "expected array of strings");
  for (const auto& v : j[key]) {
    if (!v.is_string()) fail(path + "." + key, "expected array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

LinkProfile parse_profile(const json& j, const std::string& path) {
  check_keys(j, path,
             {"name", "base_latency_us", "jitter_median_us", "jitter_sigma",
              "per_byte_us", "loss_rate"});
  LinkProfile p;
  p.name = get_string(j, path, "name");
  p.base_latency_us = get_uint(j, path, "base_latency_us");
  p.jitter_median_us = get_double_or(j, path, "jitter_median_us", 0.0);
  p.jitter_sigma = get_double_or(j, path, "jitter_sigma", 0.0);
  p.per_byte_us = get_double_or(j, path, "per_byte_us", 0.0);
  p.loss_rate = get_double_or(j, path, "loss_rate", 0.0);
  return p;
}

AgentSpec parse_agent(const json& j, const std::string& path) {
  check_keys(j, path,
             {"id", "role", "link", "heartbeat_interval_us", "key_id",
              "inference"});
  AgentSpec a;
  a.id = AgentId{get_string(j, path, "id")};
  const std::string role = get_string(j, path, "role");
  if (role == "orchestrator") a.role = Role::orchestrator;
  else if (role == "mobile") a.role = Role::mobile;
  else if (role == "bridge") a.role = Role::bridge;
  else fail(path + ".role", "expected orchestrator|mobile|bridge");
  a.link = get_string(j, path, "link");
  a.heartbeat_interval_us = get_uint_or(j, path, "heartbeat_interval_us", 500'000);
  if (j.contains("key_id")) a.key_id = get_string(j, path, "key_id");
  if (j.contains("inference")) {
    const json& inf = j["inference"];
    const std::string ipath = path + ".inference";
    check_keys(inf, ipath, {"local_capacity_bytes", "cloud_host"});
    a.inference.local_capacity_bytes =
        get_uint_or(inf, ipath, "local_capacity_bytes", 64 * 1024);
    if (inf.contains("cloud_host")) {
      a.inference.cloud_host = get_string(inf, ipath, "cloud_host");
    }
  }
  return a;
}

DeviceSpec parse_device(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "kind", "actuation_duration_us", "initial_state"});
  DeviceSpec d;
  d.id = get_string(j, path, "id");
  auto kind = device_kind_from_string(get_string(j, path, "kind"));
  if (!kind) fail(path + ".kind", "unknown device kind");
  d.kind = *kind;
  d.actuation_duration_us = get_uint_or(j, path, "actuation_duration_us", 0);
  d.initial_state = get_string_or(j, path, "initial_state",
                                  default_initial_state(d.kind));
  return d;
}

AttackSpec parse_attack(const json& j, const std::string& path) {
  check_keys(j, path,
             {"kind", "at_us", "device", "action", "claim", "flood_k",
              "flood_spacing_us", "agent", "request_bytes", "label", "doc",
              "content", "link", "lead_us", "duration_us",
              "network_recovery_us", "bridge_setup_us"});
  AttackSpec a;
  auto kind = attack_kind_from_string(get_string(j, path, "kind"));
  if (!kind) fail(path + ".kind", "unknown attack kind");
  a.kind = *kind;
  a.at_us = get_uint_or(j, path, "at_us", a.at_us);
  a.device = get_string_or(j, path, "device", "");
  a.action = get_string_or(j, path, "action", "");
  a.claim = get_string_or(j, path, "claim", "");
  a.flood_k = get_uint_or(j, path, "flood_k", a.flood_k);
  a.flood_spacing_us = get_uint_or(j, path, "flood_spacing_us", a.flood_spacing_us);
  a.agent = get_string_or(j, path, "agent", "");
  a.request_bytes = get_uint_or(j, path, "request_bytes", a.request_bytes);
  a.label = get_string_or(j, path, "label", "");
  a.doc = get_string_or(j, path, "doc", a.doc);
  a.content = get_string_or(j, path, "content", a.content);
  a.link = get_string_or(j, path, "link", "");
  a.lead_us = get_uint_or(j, path, "lead_us", a.lead_us);
  a.duration_us = get_uint_or(j, path, "duration_us", a.duration_us);
  a.network_recovery_us = get_uint_or(j, path, "network_recovery_us", a.network_recovery_us);
  a.bridge_setup_us = get_uint_or(j, path, "bridge_setup_us", a.bridge_setup_us);
  return a;
}

Workload parse_workload(const json& j, const std::string& path) {
  check_keys(j, path,
             {"command_load", "sensor_load", "status_load", "echo_benchmarks",
              "inference_requests", "commands"});
  Workload w;
  if (j.contains("command_load")) {
    const json& c = j["command_load"];
    const std::string p = path + ".command_load";
    check_keys(c, p, {"n", "start_us", "interval_us", "issuer", "devices",
                      "action_types"});
    CommandLoad load;
    load.n = get_uint(c, p, "n");
    load.start_us = get_uint_or(c, p, "start_us", load.start_us);
    load.interval_us = get_uint_or(c, p, "interval_us", load.interval_us);
    load.issuer = get_string_or(c, p, "issuer", "");
    load.devices = get_string_list_or(c, p, "devices");
    load.action_types = get_string_list_or(c, p, "action_types");
    w.command_load = std::move(load);
  }
  if (j.contains("sensor_load")) {
    const json& c = j["sensor_load"];
    const std::string p = path + ".sensor_load";
    check_keys(c, p, {"n", "start_us", "interval_us", "devices"});
    SensorLoad load;
    load.n = get_uint(c, p, "n");
    load.start_us = get_uint_or(c, p, "start_us", load.start_us);
    load.interval_us = get_uint_or(c, p, "interval_us", load.interval_us);
    load.devices = get_string_list_or(c, p, "devices");
    w.sensor_load = std::move(load);
  }
  if (j.contains("status_load")) {
    const json& c = j["status_load"];
    const std::string p = path + ".status_load";
    check_keys(c, p, {"n", "start_us", "interval_us"});
    StatusLoad load;
    load.n = get_uint(c, p, "n");
    load.start_us = get_uint_or(c, p, "start_us", load.start_us);
    load.interval_us = get_uint_or(c, p, "interval_us", load.interval_us);
    w.status_load = std::move(load);
  }
  if (j.contains("echo_benchmarks")) {
    if (!j["echo_benchmarks"].is_array()) fail(path + ".echo_benchmarks", "expected array");
    std::size_t i = 0;
    for (const auto& b : j["echo_benchmarks"]) {
      const std::string p = path + ".echo_benchmarks[" + std::to_string(i++) + "]";
      check_keys(b, p, {"name", "target", "payload_bytes", "count",
                        "timeout_us", "start_us"});
      EchoBenchSpec spec;
      spec.target = get_string(b, p, "target");
      spec.payload_bytes = get_uint_or(b, p, "payload_bytes", spec.payload_bytes);
      spec.count = get_uint_or(b, p, "count", spec.count);
      spec.timeout_us = get_uint_or(b, p, "timeout_us", spec.timeout_us);
      spec.start_us = get_uint_or(b, p, "start_us", spec.start_us);
      spec.name = get_string_or(b, p, "name",
                                std::to_string(spec.payload_bytes) + "B");
      w.echo_benchmarks.push_back(std::move(spec));
    }
  }
  if (j.contains("inference_requests")) {
    if (!j["inference_requests"].is_array()) fail(path + ".inference_requests", "expected array");
    std::size_t i = 0;
    for (const auto& r : j["inference_requests"]) {
      const std::string p = path + ".inference_requests[" + std::to_string(i++) + "]";
      check_keys(r, p, {"at_us", "agent", "request_bytes", "label"});
      InferenceRequest req;
      req.at_us = get_uint_or(r, p, "at_us", req.at_us);
      req.agent = get_string(r, p, "agent");
      req.request_bytes = get_uint(r, p, "request_bytes");
      req.label = get_string_or(r, p, "label", "");
      w.inference_requests.push_back(std::move(req));
    }
  }
  if (j.contains("commands")) {
    if (!j["commands"].is_array()) fail(path + ".commands", "expected array");
    std::size_t i = 0;
    for (const auto& c : j["commands"]) {
      const std::string p = path + ".commands[" + std::to_string(i++) + "]";
      check_keys(c, p, {"at_us", "issuer", "device", "action"});
      ExplicitCommand cmd;
      cmd.at_us = get_uint(c, p, "at_us");
      cmd.issuer = get_string_or(c, p, "issuer", "");
      cmd.device = get_string(c, p, "device");
      cmd.action = get_string(c, p, "action");
      w.commands.push_back(std::move(cmd));
    }
  }
  return w;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text,
                              const std::string& base_dir) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ScenarioError("config: not a JSON object");
  }
  check_keys(j, "config",
             {"name", "archetype", "seed", "duration_us", "posture",
              "trust_mode", "signing", "state_mode", "boundary_policy",
              "trust", "link_profiles", "reconnect", "monitor_link", "agents",
              "devices", "dns", "keystore", "keystore_file", "acl", "acl_file",
              "workload", "partitions", "attacks", "max_payload_bytes"});

  ScenarioConfig cfg;
  cfg.name = get_string_or(j, "config", "name", "scenario");
  const std::string arch = get_string_or(j, "config", "archetype", "edge_local");
  if (arch == "cloud_hosted") cfg.archetype = Archetype::cloud_hosted;
  else if (arch == "edge_local") cfg.archetype = Archetype::edge_local;
  else if (arch == "hybrid") cfg.archetype = Archetype::hybrid;
  else fail("config.archetype", "expected cloud_hosted|edge_local|hybrid");

  cfg.seed = get_uint_or(j, "config", "seed", 1);
  cfg.duration_us = get_uint_or(j, "config", "duration_us", 10'000'000);

  const std::string posture = get_string_or(j, "config", "posture", "baseline");
  if (posture == "baseline") cfg.posture = BrokerMode::baseline;
  else if (posture == "hardened") cfg.posture = BrokerMode::hardened;
  else fail("config.posture", "expected baseline|hardened");

  const std::string trust_mode = get_string_or(j, "config", "trust_mode", posture);
  if (trust_mode == "baseline") cfg.trust_mode = TrustMode::baseline;
  else if (trust_mode == "hardened") cfg.trust_mode = TrustMode::hardened;
  else fail("config.trust_mode", "expected baseline|hardened");

  const std::string signing = get_string_or(j, "config", "signing", "auto");
  if (signing == "auto") cfg.signing = SigningMode::follow_posture;
  else if (signing == "on") cfg.signing = SigningMode::on;
  else if (signing == "off") cfg.signing = SigningMode::off;
  else fail("config.signing", "expected auto|on|off");

  const std::string state_mode =
      get_string_or(j, "config", "state_mode",
                    cfg.posture == BrokerMode::hardened ? "state_plane" : "embedded");
  if (state_mode == "embedded") cfg.state_mode = StateMode::embedded;
  else if (state_mode == "state_plane") cfg.state_mode = StateMode::state_plane;
  else fail("config.state_mode", "expected embedded|state_plane");

  if (j.contains("boundary_policy")) {
    const json& b = j["boundary_policy"];
    check_keys(b, "config.boundary_policy", {"cloud_fallback", "sensitive_labels"});
    const std::string fb = get_string_or(b, "config.boundary_policy",
                                         "cloud_fallback", "allow_silent");
    if (fb == "forbid") cfg.boundary.cloud_fallback = CloudFallback::forbid;
    else if (fb == "allow_silent") cfg.boundary.cloud_fallback = CloudFallback::allow_silent;
    else if (fb == "allow_with_marker") cfg.boundary.cloud_fallback = CloudFallback::allow_with_marker;
    else fail("config.boundary_policy.cloud_fallback",
              "expected forbid|allow_silent|allow_with_marker");
    for (const auto& s : get_string_list_or(b, "config.boundary_policy", "sensitive_labels")) {
      cfg.boundary.sensitive_labels.insert(s);
    }
  }

  if (j.contains("trust")) {
    const json& t = j["trust"];
    check_keys(t, "config.trust", {"distrust_threshold", "oob_response_delay_us"});
    cfg.trust.distrust_threshold =
        get_uint_or(t, "config.trust", "distrust_threshold", 5);
    cfg.trust.oob_response_delay_us =
        get_uint_or(t, "config.trust", "oob_response_delay_us", 60'000'000);
  }

  if (j.contains("link_profiles")) {
    if (!j["link_profiles"].is_array()) fail("config.link_profiles", "expected array");
    std::size_t i = 0;
    for (const auto& p : j["link_profiles"]) {
      cfg.link_profiles.push_back(
          parse_profile(p, "config.link_profiles[" + std::to_string(i++) + "]"));
    }
  }

  if (j.contains("reconnect")) {
    const json& r = j["reconnect"];
    check_keys(r, "config.reconnect",
               {"base_delay_us", "jitter_median_us", "jitter_sigma"});
    cfg.reconnect.base_delay_us = get_uint_or(r, "config.reconnect", "base_delay_us", 9'300);
    cfg.reconnect.jitter_median_us =
        get_double_or(r, "config.reconnect", "jitter_median_us", 0.0);
    cfg.reconnect.jitter_sigma = get_double_or(r, "config.reconnect", "jitter_sigma", 0.0);
  }

  cfg.monitor_link = get_string_or(j, "config", "monitor_link", "");

  if (j.contains("agents")) {
    if (!j["agents"].is_array()) fail("config.agents", "expected array");
    std::size_t i = 0;
    for (const auto& a : j["agents"]) {
      cfg.agents.push_back(parse_agent(a, "config.agents[" + std::to_string(i++) + "]"));
    }
  }

  if (j.contains("devices")) {
    if (!j["devices"].is_array()) fail("config.devices", "expected array");
    std::size_t i = 0;
    for (const auto& d : j["devices"]) {
      cfg.devices.push_back(parse_device(d, "config.devices[" + std::to_string(i++) + "]"));
    }
  }

  if (j.contains("dns")) {
    const json& d = j["dns"];
    check_keys(d, "config.dns", {"retry_count", "retry_interval_us", "hosts"});
    cfg.dns.retry_count = static_cast<unsigned>(get_uint_or(d, "config.dns", "retry_count", 10));
    cfg.dns.retry_interval_us = get_uint_or(d, "config.dns", "retry_interval_us", 1'000);
    if (d.contains("hosts")) {
      if (!d["hosts"].is_object()) fail("config.dns.hosts", "expected object");
      for (auto it = d["hosts"].begin(); it != d["hosts"].end(); ++it) {
        if (!it.value().is_string()) fail("config.dns.hosts", "addresses must be strings");
        cfg.dns.hosts[it.key()] = it.value().get<std::string>();
      }
    }
  }

  if (j.contains("keystore") && j.contains("keystore_file")) {
    fail("config", "use either keystore or keystore_file, not both");
  }
  try {
    if (j.contains("keystore")) {
      if (!j["keystore"].is_array()) fail("config.keystore", "expected array");
      std::size_t i = 0;
      for (const auto& k : j["keystore"]) {
        const std::string p = "config.keystore[" + std::to_string(i++) + "]";
        check_keys(k, p, {"key_id", "sender", "key_hex"});
        const std::string line = get_string(k, p, "key_id") + " " +
                                 get_string(k, p, "sender") + " " +
                                 get_string(k, p, "key_hex");
        Keystore one = Keystore::parse(line);
        for (auto& [kid, entry] : one.keys) cfg.keystore.keys[kid] = entry;
      }
    } else if (j.contains("keystore_file")) {
      const fs::path p = fs::path(base_dir) / get_string(j, "config", "keystore_file");
      cfg.keystore = Keystore::parse(read_file(p.string()));
    }
  } catch (const EnvelopeError& e) {
    fail("config.keystore", e.what());
  }

  if (j.contains("acl") && j.contains("acl_file")) {
    fail("config", "use either acl or acl_file, not both");
  }
  try {
    if (j.contains("acl")) {
      std::string text;
      for (const auto& line : get_string_list_or(j, "config", "acl")) {
        text += line + "\n";
      }
      cfg.acl = Acl::parse(text);
    } else if (j.contains("acl_file")) {
      const fs::path p = fs::path(base_dir) / get_string(j, "config", "acl_file");
      cfg.acl = Acl::parse(read_file(p.string()));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ScenarioError*>(&e)) throw;
    fail("config.acl", e.what());
  }

  if (j.contains("workload")) {
    cfg.workload = parse_workload(j["workload"], "config.workload");
  }

  if (j.contains("partitions")) {
    if (!j["partitions"].is_array()) fail("config.partitions", "expected array");
    std::size_t i = 0;
    for (const auto& p : j["partitions"]) {
      const std::string path = "config.partitions[" + std::to_string(i++) + "]";
      check_keys(p, path, {"link", "at_us", "duration_us",
                           "network_recovery_us", "bridge_setup_us"});
      PartitionSpec spec;
      spec.link = get_string(p, path, "link");
      spec.start_us = get_uint(p, path, "at_us");
      spec.duration_us = get_uint(p, path, "duration_us");
      spec.network_recovery_us = get_uint_or(p, path, "network_recovery_us", 0);
      spec.bridge_setup_us = get_uint_or(p, path, "bridge_setup_us", 0);
      cfg.partitions.push_back(std::move(spec));
    }
  }

  if (j.contains("attacks")) {
    if (!j["attacks"].is_array()) fail("config.attacks", "expected array");
    std::size_t i = 0;
    for (const auto& a : j["attacks"]) {
      cfg.attacks.push_back(parse_attack(a, "config.attacks[" + std::to_string(i++) + "]"));
    }
  }

  cfg.max_payload_bytes =
      get_uint_or(j, "config", "max_payload_bytes", kDefaultMaxPayloadBytes);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  const std::string text = read_file(path);
  return parse_scenario(text, fs::path(path).parent_path().string());
}

namespace {

void require(std::vector<ValidationError>& errs, bool ok, std::string path,
             std::string message) {
  if (!ok) errs.push_back(ValidationError{std::move(path), std::move(message)});
}

}  // namespace

std::vector<ValidationError> validate(const ScenarioConfig& cfg) {
  std::vector<ValidationError> errs;

  require(errs, !cfg.agents.empty(), "agents", "at least one agent required");
  std::size_t orchestrators = 0;
  std::set<std::string> agent_ids;
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const AgentSpec& a = cfg.agents[i];
    const std::string path = "agents[" + std::to_string(i) + "]";
    require(errs, AgentId::valid(a.id.id), path + ".id",
            "id must be non-empty without '/', '+', '#'");
    require(errs, agent_ids.insert(a.id.id).second, path + ".id",
            "duplicate agent id " + a.id.id);
    if (a.role == Role::orchestrator) ++orchestrators;
    require(errs, cfg.profile(a.link) != nullptr, path + ".link",
            "unknown link profile '" + a.link + "'");
    require(errs, a.heartbeat_interval_us > 0, path + ".heartbeat_interval_us",
            "must be > 0");
    if (a.key_id) {
      const KeyEntry* e = cfg.keystore.find(*a.key_id);
      require(errs, e != nullptr, path + ".key_id",
              "key '" + *a.key_id + "' not in keystore");
      if (e) {
        require(errs, e->sender == a.id.id, path + ".key_id",
                "key '" + *a.key_id + "' is registered for sender '" +
                    e->sender + "'");
      }
    } else {
      require(errs, !cfg.signing_enabled(), path + ".key_id",
              "signing is enabled but agent has no key_id");
    }
  }
  require(errs, orchestrators == 1, "agents",
          "exactly one orchestrator required (found " +
              std::to_string(orchestrators) + ")");

  for (std::size_t i = 0; i < cfg.link_profiles.size(); ++i) {
    const LinkProfile& p = cfg.link_profiles[i];
    const std::string path = "link_profiles[" + std::to_string(i) + "]";
    require(errs, !p.name.empty(), path + ".name", "empty profile name");
    require(errs, p.valid(), path, "jitter/per_byte must be >= 0 and loss_rate in [0,1]");
  }
  if (!cfg.monitor_link.empty()) {
    require(errs, cfg.profile(cfg.monitor_link) != nullptr, "monitor_link",
            "unknown link profile '" + cfg.monitor_link + "'");
  }

  std::set<std::string> device_ids;
  for (std::size_t i = 0; i < cfg.devices.size(); ++i) {
    const DeviceSpec& d = cfg.devices[i];
    const std::string path = "devices[" + std::to_string(i) + "]";
    require(errs, !d.id.empty(), path + ".id", "empty device id");
    require(errs, device_ids.insert(d.id).second, path + ".id",
            "duplicate device id " + d.id);
    require(errs, AgentId::valid(d.id), path + ".id",
            "device id must be topic-segment safe");
    if (d.kind != DeviceKind::sensor) {
      require(errs, cfg.device_duration(d) > 0, path + ".actuation_duration_us",
              "must be > 0");
    }
  }

  if (cfg.posture == BrokerMode::hardened) {
    require(errs, !cfg.keystore.empty(), "keystore",
            "hardened posture requires a non-empty keystore");
  }

  if (cfg.workload.command_load) {
    const CommandLoad& load = *cfg.workload.command_load;
    if (!load.issuer.empty()) {
      require(errs, cfg.agent(load.issuer) != nullptr,
              "workload.command_load.issuer", "unknown agent " + load.issuer);
    }
    for (const auto& d : load.devices) {
      require(errs, cfg.device(d) != nullptr, "workload.command_load.devices",
              "unknown device " + d);
    }
    bool has_bridge = cfg.first_with_role(Role::bridge) != nullptr;
    require(errs, load.n == 0 || has_bridge, "workload.command_load",
            "command load requires a bridge agent");
  }
  if (cfg.workload.sensor_load) {
    for (const auto& d : cfg.workload.sensor_load->devices) {
      const DeviceSpec* spec = cfg.device(d);
      require(errs, spec != nullptr, "workload.sensor_load.devices",
              "unknown device " + d);
      if (spec) {
        require(errs, spec->kind == DeviceKind::sensor,
                "workload.sensor_load.devices", d + " is not a sensor");
      }
    }
  }
  for (std::size_t i = 0; i < cfg.workload.echo_benchmarks.size(); ++i) {
    const EchoBenchSpec& b = cfg.workload.echo_benchmarks[i];
    const std::string path = "workload.echo_benchmarks[" + std::to_string(i) + "]";
    require(errs, cfg.agent(b.target) != nullptr, path + ".target",
            "unknown agent " + b.target);
    require(errs, b.timeout_us > 0, path + ".timeout_us", "must be > 0");
  }
  for (std::size_t i = 0; i < cfg.workload.inference_requests.size(); ++i) {
    const InferenceRequest& r = cfg.workload.inference_requests[i];
    const std::string path = "workload.inference_requests[" + std::to_string(i) + "]";
    require(errs, cfg.agent(r.agent) != nullptr, path + ".agent",
            "unknown agent " + r.agent);
    require(errs, r.request_bytes > 0, path + ".request_bytes", "must be > 0");
  }
  for (std::size_t i = 0; i < cfg.workload.commands.size(); ++i) {
    const ExplicitCommand& c = cfg.workload.commands[i];
    const std::string path = "workload.commands[" + std::to_string(i) + "]";
    require(errs, cfg.device(c.device) != nullptr, path + ".device",
            "unknown device " + c.device);
    if (!c.issuer.empty() && c.issuer != "operator") {
      require(errs, cfg.agent(c.issuer) != nullptr, path + ".issuer",
              "unknown issuer " + c.issuer);
    }
  }

  std::map<std::string, std::vector<std::pair<Micros, Micros>>> partition_spans;
  for (std::size_t i = 0; i < cfg.partitions.size(); ++i) {
    const PartitionSpec& p = cfg.partitions[i];
    const std::string path = "partitions[" + std::to_string(i) + "]";
    require(errs, p.duration_us > 0, path + ".duration_us", "must be > 0");
    bool link_used = false;
    for (const auto& a : cfg.agents) link_used = link_used || a.link == p.link;
    if (!cfg.monitor_link.empty()) link_used = link_used || cfg.monitor_link == p.link;
    require(errs, cfg.profile(p.link) != nullptr && link_used, path + ".link",
            "partition link must name a profile in use");
    auto& spans = partition_spans[p.link];
    for (const auto& [s, e] : spans) {
      require(errs, p.link_usable_at() <= s || e <= p.start_us, path,
              "overlapping partition on link " + p.link);
    }
    spans.emplace_back(p.start_us, p.link_usable_at());
  }

  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
    const AttackSpec& a = cfg.attacks[i];
    const std::string path = "attacks[" + std::to_string(i) + "]";
    if (!a.device.empty()) {
      require(errs, cfg.device(a.device) != nullptr, path + ".device",
              "unknown device " + a.device);
    }
    if (!a.agent.empty()) {
      require(errs, cfg.agent(a.agent) != nullptr, path + ".agent",
              "unknown agent " + a.agent);
    }
    if (!a.link.empty()) {
      require(errs, cfg.profile(a.link) != nullptr, path + ".link",
              "unknown link profile " + a.link);
    }
    if (a.kind == AttackKind::InducedFallback) {
      const AgentSpec* target =
          a.agent.empty() ? cfg.first_with_role(Role::mobile) : cfg.agent(a.agent);
      require(errs, target != nullptr, path, "no mobile agent for InducedFallback");
      if (target) {
        require(errs, target->inference.cloud_host.has_value(), path,
                "InducedFallback target has no cloud host configured");
      }
    }
  }

  require(errs, cfg.max_payload_bytes > 0, "max_payload_bytes", "must be > 0");
  require(errs, cfg.duration_us > 0, "duration_us", "must be > 0");
  return errs;
}

}  // namespace swarmsim
