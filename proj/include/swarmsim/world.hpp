#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/agents.hpp"
#include "swarmsim/broker.hpp"
#include "swarmsim/metrics.hpp"
#include "swarmsim/netsim.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/sovereignty.hpp"
#include "swarmsim/stateplane.hpp"
#include "swarmsim/trust.hpp"

namespace swarmsim {

struct PublishLogEntry {
  Micros sent_at_us = 0;  // client-side publish time
  DeliveryRecord record;  // broker verdict + fan-out
};

struct MissedDelivery {
  Micros time_us = 0;
  SessionId session = 0;
  std::string principal;
  std::string topic;
  std::string why;  // loss | partition | parked
};

struct MirrorReceipt {
  Micros receipt_us = 0;    // monitor-side arrival
  Micros broker_ts_us = 0;  // stamped by the broker wrapper
  std::string orig_topic;
  Envelope env;  // lenient decode of the original frame
  bool has_auth = false;
  bool decode_ok = false;
};

struct CommandIssueRecord {
  Micros publish_us = 0;
  std::string corr_id;
  std::string device;
  std::string action;
  std::string issuer;
};

struct FailoverRow {
  PartitionSpec spec;
  std::string principal;
  Micros reconnect_delay_us = 0;
  Micros blackout_start_us = 0;
  Micros blackout_end_us = 0;  // reconnect completion
  Micros blackout_us = 0;
};

struct ConflictEventRecord {
  Micros time_us = 0;
  ConflictReport report;
  std::string author;
};

struct ReconnectSample {
  Micros time_us = 0;
  std::string principal;
  Micros delay_us = 0;
};

// Per-attack bookkeeping filled while the scripted events run; outcomes are
// assembled from it after the run (see attacks.hpp).
struct AttackRuntime {
  AttackSpec spec;
  std::vector<std::string> corr_ids;        // correlation ids the attack used
  std::vector<std::size_t> publish_indices; // entries in publish_log
  std::string legit_corr;      // replay: the captured command / flood: 1st op cmd
  std::string retry_corr;      // flood: post-OOB resend
  bool mirror_capture_granted = false;
  std::size_t partition_index = 0;  // into failover_rows (PartitionBlackout)
  bool used_partition = false;
};

class World {
 public:
  explicit World(ScenarioConfig config);

  // Connects sessions, arms heartbeats, schedules workloads, partitions and
  // scripted attacks. Must be called exactly once before running.
  void init();

  bool step();                 // one event; false when exhausted
  void run_until(Micros t_us); // processes every event with fire_at <= t
  void run();                  // run_until(cfg.duration_us)

  // --- publishing -----------------------------------------------------
  // Client-side publish: samples the uplink hop, defers or drops when the
  // publisher is unreachable, then hands the frame to the broker.
  void client_publish(SessionId session, const Topic& topic, Bytes bytes);
  // Encode (+sign when the scenario enables signing) and publish.
  void publish_envelope(AgentRuntime& agent, const Topic& topic, Envelope env);

  // --- agent operations -------------------------------------------------
  void heartbeat_tick(AgentRuntime& agent);
  std::string issue_command(const std::string& issuer_principal,
                            const std::string& device,
                            const std::string& action,
                            std::optional<std::string> reuse_corr = std::nullopt);
  void start_echo_bench(std::size_t bench_index);
  void run_inference(const std::string& agent_id, std::size_t request_bytes,
                     const std::string& label);
  // Operator re-issues a refused command to the orchestrator inbox.
  std::string issue_operator_retry(const std::string& device,
                                   const std::string& action);

  // --- device/actuation ---------------------------------------------------
  void start_actuation(const std::string& device, const std::string& action,
                       std::optional<std::string> corr,
                       std::optional<std::string> issued_by, bool via_gateway,
                       bool audited);

  // --- netsim ---------------------------------------------------------
  void apply_partition(const PartitionSpec& spec);
  void disconnect_session(SessionId session);
  Micros reconnect_session(SessionId session);  // returns sampled delay
  Micros sample_reconnect_delay();

  // --- sessions ---------------------------------------------------------
  SessionId connect_client(const std::string& principal, const std::string& link);
  SessionId rogue_session();  // lazily connected attacker client
  SessionId operator_session();
  CounterState& operator_counters() { return external_counters_; }

  bool session_unreachable(const BrokerSession& s, Micros t) const;

  // --- queries used by attacks/reports ---------------------------------
  std::size_t actuation_count_for_corr(const std::string& corr) const;
  std::size_t audit_count_for_corr(const std::string& corr) const;
  std::optional<Micros> audit_visibility_us(const std::string& corr) const;
  const PublishLogEntry* find_publish(const std::string& corr,
                                      const std::string& principal) const;
  std::size_t operations() const;  // accepted non-heartbeat publishes
  AgentRuntime* find_agent(const std::string& id);
  const AgentRuntime* find_agent(const std::string& id) const;
  AgentRuntime& orchestrator();
  AgentRuntime& bridge();

  // Distinct copies of a shared document across agents (embedded mode), or
  // distinct store-resolved views (state-plane mode).
  std::size_t measure_divergence(const std::string& doc) const;

  // --- configuration & state -------------------------------------------
  ScenarioConfig cfg;
  VirtualClock clock;
  EventQueue queue;
  Rng rng;
  Broker broker;
  BrokerPolicy policy;
  ReplayState broker_replay;
  StateStore store;
  OobChannel oob;
  EgressLedger ledger;
  std::vector<DnsEvent> dns_log;

  std::map<std::string, LinkState> links;      // by profile name
  std::map<std::string, AgentRuntime> agents;  // by agent id
  std::map<std::string, Device> devices;
  std::map<SessionId, std::string> session_agent;  // session -> agent id
  SessionId monitor = 0;
  std::string monitor_link_name;

  // run collectors
  std::vector<ProcessedEvent> trace;
  std::vector<PublishLogEntry> publish_log;
  std::vector<MissedDelivery> missed;
  std::vector<MirrorReceipt> mirror_log;
  std::vector<ActuationRecord> actuations;
  std::vector<CommandIssueRecord> issued_commands;
  std::vector<EchoBenchState> echo_benches;
  std::vector<InferenceRecord> inferences;
  std::vector<FailoverRow> failover_rows;
  std::vector<ConflictEventRecord> conflicts;
  std::vector<ReconnectSample> reconnect_samples;
  std::vector<AttackRuntime> attack_state;
  std::vector<Bytes> rogue_mirror_captures;  // wrapped frames seen by the rogue

  bool oob_reset_scheduled = false;

 private:
  void connect_roster();
  void schedule_workloads();
  void schedule_partitions();
  void schedule_attacks();

  void broker_receive(SessionId session, Topic topic, Bytes bytes,
                      Micros sent_at);
  void schedule_delivery(const PlannedDelivery& d, Micros broker_ts);
  void deliver(PlannedDelivery d, Micros scheduled_at, bool lost);
  void agent_on_delivery(AgentRuntime& agent, const std::string& topic,
                         const Bytes& bytes, bool is_mirror);
  void handle_inbox(AgentRuntime& agent, const Envelope& env,
                    const std::optional<AuthBlock>& auth);
  void handle_gateway_actuate(AgentRuntime& bridge_agent,
                              const std::string& device_id, const Envelope& env);
  void orchestrator_command(AgentRuntime& agent, const Envelope& env,
                            const std::optional<AuthBlock>& auth);
  void bridge_command(AgentRuntime& agent, const Envelope& env);
  void flush_outbox(AgentRuntime& agent);

  void echo_send_next(std::size_t bench_index);
  void echo_on_reply(AgentRuntime& orch, const Envelope& env);
  void echo_on_timeout(std::size_t bench_index, std::string corr);

  const LinkProfile& link_profile(const std::string& name) const;
  Micros full_latency_sample(const std::string& link, std::size_t payload_len);

  SessionId rogue_ = 0;
  SessionId operator_ = 0;
  CounterState external_counters_;  // operator-side signing counters
};

// Scripted attack installation + per-kind defaults. Defined in attacks.cpp.
void install_attack(World& world, const AttackSpec& spec);

}  // namespace swarmsim
