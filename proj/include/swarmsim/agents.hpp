#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/broker.hpp"
#include "swarmsim/envelope.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/trust.hpp"

namespace swarmsim {

struct Device {
  DeviceSpec spec;
  Micros actuation_duration_us = 0;
  std::string state;
};

struct ActuationRecord {
  std::string device;
  DeviceKind kind = DeviceKind::light;
  std::string action;
  std::optional<std::string> corr_id;
  std::optional<std::string> issued_by;  // absent = untraceable
  bool via_gateway = false;  // raw iot/actuate publish, agent logic bypassed
  bool audited = false;      // bridge published an audit record at start
  Micros start_us = 0;
  Micros complete_us = 0;
};

// A publish deferred while the publisher was unreachable; flushed on
// reconnect. Only audit-type envelopes are deferred, everything else is
// dropped (at-most-once).
struct PendingPublish {
  Topic topic;
  Bytes bytes;
};

struct EchoBenchState {
  EchoBenchSpec spec;
  std::size_t sent = 0;
  std::optional<std::string> outstanding_corr;
  Micros sent_at_us = 0;
  std::uint64_t timeout_event = 0;
  std::vector<Micros> samples;
  std::size_t timeouts = 0;
  bool finished = false;
};

struct InferenceRecord {
  Micros at_us = 0;
  std::string agent;
  std::size_t request_bytes = 0;
  std::string label;
  std::string outcome;  // local | cloud | cloud_fallback | sovereignty_denied | cancelled
  bool local_cancelled = false;  // local endpoint returned CANCELLED (499)
  std::size_t dns_events = 0;
  bool marker_published = false;
};

// Where an agent believes a shared document lives.
struct DocView {
  std::string ref;
  std::string commit;  // last head this agent saw (CAS expected parent)
  std::string path;
};

struct AgentRuntime {
  AgentSpec spec;
  SessionId session = 0;
  std::string beacon_tag;  // announced on heartbeats, stamped into payloads
  CounterState counters;
  ReplayState inbound_replay;  // agent-side verification window
  TrustState trust;            // consulted for inbox commands (orchestrator)
  std::deque<PendingPublish> outbox;
  std::map<std::string, Bytes> doc_copies;  // embedded mode
  std::map<std::string, DocView> doc_views; // state-plane mode
  std::size_t unknown_msgs = 0;
  std::size_t malformed_payloads = 0;
  std::size_t heartbeats_attempted = 0;
};

// Payload helpers. Agent payloads are JSON stamped with the sender's beacon
// tag; attackers that cannot observe the beacon produce contradictions the
// trust layer can spot without cryptography.
Bytes make_agent_payload(const AgentRuntime& agent,
                         std::map<std::string, std::string> fields);
Bytes make_raw_payload(std::map<std::string, std::string> fields);
std::optional<std::map<std::string, std::string>> parse_payload(const Bytes& b);

// Deterministic filler of exactly n bytes for benchmark payloads.
Bytes make_filler(std::size_t n);

}  // namespace swarmsim
