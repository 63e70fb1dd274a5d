#include <cmath>

#include "swarmsim/world.hpp"

namespace swarmsim {

namespace {

Topic topic_of(const std::string& path) {
  auto t = Topic::parse(path);
  if (!t) throw SimError("bad topic: " + path);
  return *t;
}

std::string inbox_of(const std::string& id) { return "agents/inbox/" + id; }

std::string state_after(const std::string& action, const std::string& current) {
  if (action == "lock") return "locked";
  if (action == "unlock") return "unlocked";
  if (action == "open") return "open";
  if (action == "close") return "closed";
  if (action == "toggle") return current == "on" ? "off" : "on";
  return action;  // on / off / scene names apply verbatim
}

}  // namespace

void World::publish_envelope(AgentRuntime& agent, const Topic& topic,
                             Envelope env) {
  std::optional<AuthBlock> auth;
  if (cfg.signing_enabled() && agent.spec.key_id) {
    auth = sign_envelope(env, *agent.spec.key_id, cfg.keystore, rng,
                         agent.counters);
  }
  client_publish(agent.session, topic,
                 encode_envelope(env, auth, cfg.max_payload_bytes));
}

void World::heartbeat_tick(AgentRuntime& agent) {
  agent.heartbeats_attempted += 1;
  Envelope env;
  env.sender = agent.spec.id;
  env.msg_type = MsgType::heartbeat;
  env.timestamp_us = clock.now_us;
  env.correlation_id = CorrelationId::generate(rng);
  env.payload = make_agent_payload(agent, {});
  publish_envelope(agent, topic_of("agents/broadcast"), env);

  AgentRuntime* self = &agent;
  queue.schedule(clock, clock.now_us + agent.spec.heartbeat_interval_us,
                 "heartbeat_arm", agent.spec.id.id,
                 [this, self] { heartbeat_tick(*self); });
}

std::string World::issue_command(const std::string& issuer_principal,
                                 const std::string& device,
                                 const std::string& action,
                                 std::optional<std::string> reuse_corr) {
  const std::string corr =
      reuse_corr ? *reuse_corr : CorrelationId::generate(rng).hex;
  const std::string bridge_inbox = inbox_of(bridge().spec.id.id);

  AgentRuntime* issuer = find_agent(issuer_principal);
  Envelope env;
  env.msg_type = MsgType::command;
  env.timestamp_us = clock.now_us;
  env.correlation_id = CorrelationId{corr};
  if (issuer) {
    env.sender = issuer->spec.id;
    env.payload =
        make_agent_payload(*issuer, {{"device", device}, {"action", action}});
    publish_envelope(*issuer, topic_of(bridge_inbox), env);
  } else {
    // External principal (the human operator) publishing through its own
    // session; signed when the scenario runs with signing on.
    env.sender = AgentId{issuer_principal};
    env.payload = make_raw_payload(
        {{"from", issuer_principal}, {"device", device}, {"action", action}});
    std::optional<AuthBlock> auth;
    if (cfg.signing_enabled()) {
      if (auto key_id = cfg.keystore.key_id_for_sender(issuer_principal)) {
        auth = sign_envelope(env, *key_id, cfg.keystore, rng,
                             external_counters_);
      }
    }
    client_publish(operator_session(), topic_of(bridge_inbox),
                   encode_envelope(env, auth, cfg.max_payload_bytes));
  }
  issued_commands.push_back(
      CommandIssueRecord{clock.now_us, corr, device, action, issuer_principal});
  return corr;
}

void World::agent_on_delivery(AgentRuntime& agent, const std::string& topic,
                              const Bytes& bytes, bool is_mirror) {
  if (is_mirror) return;  // agents do not consume their own supervision feed

  auto parsed = Topic::parse(topic);
  if (!parsed) return;
  const auto& segs = parsed->segments;

  auto decoded = decode_envelope(bytes, DecodeMode::lenient, cfg.max_payload_bytes);
  if (std::holds_alternative<DecodeError>(decoded)) {
    agent.malformed_payloads += 1;  // robustness: counted, never fatal
    return;
  }
  const DecodedEnvelope& dec = std::get<DecodedEnvelope>(decoded);

  if (segs.size() == 3 && segs[0] == "iot" && segs[1] == "actuate" &&
      agent.spec.role == Role::bridge) {
    handle_gateway_actuate(agent, segs[2], dec.env);
    return;
  }
  if (segs.size() == 2 && segs[0] == "agents" && segs[1] == "broadcast") {
    if (dec.env.msg_type == MsgType::heartbeat && dec.env.sender) {
      if (auto fields = parse_payload(dec.env.payload)) {
        auto tag = fields->find("tag");
        if (tag != fields->end()) {
          agent.trust.note_heartbeat(dec.env.sender->id, tag->second);
        }
      }
    }
    return;
  }
  if (segs.size() == 3 && segs[0] == "agents" && segs[1] == "inbox" &&
      segs[2] == agent.spec.id.id) {
    handle_inbox(agent, dec.env, dec.auth);
    return;
  }
  // audit topic, sensor feeds: observed, nothing to do
}

void World::handle_inbox(AgentRuntime& agent, const Envelope& env,
                         const std::optional<AuthBlock>& auth) {
  switch (env.msg_type) {
    case MsgType::echo_probe: {
      if (!env.sender) {
        agent.unknown_msgs += 1;
        return;
      }
      Envelope reply;
      reply.sender = agent.spec.id;
      reply.msg_type = MsgType::echo_reply;
      reply.timestamp_us = env.timestamp_us;  // carries the probe timestamp
      reply.correlation_id = env.correlation_id;
      reply.payload = env.payload;
      publish_envelope(agent, topic_of(inbox_of(env.sender->id)), reply);
      return;
    }
    case MsgType::echo_reply: {
      if (agent.spec.role == Role::orchestrator) echo_on_reply(agent, env);
      return;
    }
    case MsgType::command: {
      if (agent.spec.role == Role::bridge) {
        bridge_command(agent, env);
      } else if (agent.spec.role == Role::orchestrator) {
        orchestrator_command(agent, env, auth);
      } else {
        agent.unknown_msgs += 1;
      }
      return;
    }
    case MsgType::status: {
      auto fields = parse_payload(env.payload);
      if (!fields) {
        agent.malformed_payloads += 1;
        return;
      }
      auto doc = fields->find("doc");
      auto content = fields->find("content_hex");
      if (doc != fields->end() && content != fields->end()) {
        if (auto bytes = hex_decode(content->second)) {
          agent.doc_copies[doc->second] = std::move(*bytes);  // embedded copy
        }
      }
      return;
    }
    case MsgType::state_ref: {
      auto fields = parse_payload(env.payload);
      if (!fields) {
        agent.malformed_payloads += 1;
        return;
      }
      auto doc = fields->find("doc");
      auto ref = fields->find("ref");
      auto commit = fields->find("commit");
      auto path = fields->find("path");
      if (doc != fields->end() && ref != fields->end() &&
          commit != fields->end() && path != fields->end()) {
        agent.doc_views[doc->second] =
            DocView{ref->second, commit->second, path->second};
      }
      return;
    }
    default:
      agent.unknown_msgs += 1;
      return;
  }
}

void World::handle_gateway_actuate(AgentRuntime& bridge_agent,
                                   const std::string& device_id,
                                   const Envelope& env) {
  auto it = devices.find(device_id);
  if (it == devices.end()) {
    bridge_agent.unknown_msgs += 1;
    return;
  }
  std::string action = "on";
  if (auto fields = parse_payload(env.payload)) {
    auto a = fields->find("action");
    if (a != fields->end()) action = a->second;
  }
  // Raw gateway path: no agent decision, no audit record.
  start_actuation(device_id, action,
                  env.correlation_id ? std::optional(env.correlation_id->hex)
                                     : std::nullopt,
                  env.sender ? std::optional(env.sender->id) : std::nullopt,
                  /*via_gateway=*/true, /*audited=*/false);
}

void World::orchestrator_command(AgentRuntime& agent, const Envelope& env,
                                 const std::optional<AuthBlock>& auth) {
  VerificationResult ver =
      verify_envelope(env, auth, cfg.keystore, agent.inbound_replay);
  const TrustVerdict verdict = assess(agent.trust, clock.now_us, env, ver);

  auto execute = [this, &agent](const Envelope& cmd) {
    auto fields = parse_payload(cmd.payload);
    if (!fields) {
      agent.malformed_payloads += 1;
      return;
    }
    auto device = fields->find("device");
    auto action = fields->find("action");
    if (device == fields->end() || action == fields->end()) {
      agent.unknown_msgs += 1;
      return;
    }
    issue_command(agent.spec.id.id, device->second, action->second,
                  cmd.correlation_id ? std::optional(cmd.correlation_id->hex)
                                     : std::nullopt);
  };

  switch (verdict) {
    case TrustVerdict::accept:
      execute(env);
      return;
    case TrustVerdict::quarantine:
      return;  // retained in agent.trust.quarantine
    case TrustVerdict::require_oob: {
      Envelope held = env;
      AgentRuntime* self = &agent;
      queue.schedule(clock, clock.now_us + oob.response_delay_us,
                     "oob_confirm", agent.spec.id.id,
                     [this, self, held, execute] {
                       oob_confirm(self->trust, clock.now_us);
                       execute(held);
                     });
      return;
    }
    case TrustVerdict::refuse: {
      // A refused operator command surfaces out of band; the human confirms
      // after the configured response delay, the channel resets, and the
      // command is retried.
      if (env.sender && env.sender->id == "operator" && !oob_reset_scheduled) {
        oob_reset_scheduled = true;
        Envelope held = env;
        AgentRuntime* self = &agent;
        queue.schedule(
            clock, clock.now_us + oob.response_delay_us, "oob_reset",
            agent.spec.id.id, [this, self, held] {
              oob_confirm(self->trust, clock.now_us);
              auto fields = parse_payload(held.payload);
              if (!fields) return;
              const std::string corr =
                  issue_operator_retry(fields->at("device"), fields->at("action"));
              for (AttackRuntime& at : attack_state) {
                if (at.spec.kind == AttackKind::ForgedFlood) at.retry_corr = corr;
              }
            });
      }
      return;
    }
  }
}

std::string World::issue_operator_retry(const std::string& device,
                                        const std::string& action) {
  // Operator re-sends the refused command to the orchestrator inbox.
  const std::string corr = CorrelationId::generate(rng).hex;
  Envelope env;
  env.sender = AgentId{"operator"};
  env.msg_type = MsgType::command;
  env.timestamp_us = clock.now_us;
  env.correlation_id = CorrelationId{corr};
  env.payload = make_raw_payload(
      {{"from", "operator"}, {"device", device}, {"action", action}});
  std::optional<AuthBlock> auth;
  if (cfg.signing_enabled()) {
    if (auto key_id = cfg.keystore.key_id_for_sender("operator")) {
      auth = sign_envelope(env, *key_id, cfg.keystore, rng, external_counters_);
    }
  }
  client_publish(operator_session(),
                 topic_of(inbox_of(orchestrator().spec.id.id)),
                 encode_envelope(env, auth, cfg.max_payload_bytes));
  return corr;
}

void World::bridge_command(AgentRuntime& agent, const Envelope& env) {
  auto fields = parse_payload(env.payload);
  std::string device, action;
  if (fields) {
    auto d = fields->find("device");
    auto a = fields->find("action");
    if (d != fields->end()) device = d->second;
    if (a != fields->end()) action = a->second;
  }
  if (device.empty() || action.empty()) {
    agent.malformed_payloads += 1;
    return;
  }
  auto it = devices.find(device);
  if (it == devices.end()) {
    if (env.sender) {
      Envelope err;
      err.sender = agent.spec.id;
      err.msg_type = MsgType::status;
      err.timestamp_us = clock.now_us;
      err.correlation_id = env.correlation_id;
      err.payload = make_agent_payload(
          agent, {{"error", "unknown_device"}, {"device", device}});
      publish_envelope(agent, topic_of(inbox_of(env.sender->id)), err);
    }
    return;
  }

  // Audit record goes out at execution start, before physical completion.
  Envelope audit;
  audit.sender = agent.spec.id;
  audit.msg_type = MsgType::audit;
  audit.timestamp_us = clock.now_us;
  audit.correlation_id = env.correlation_id;
  std::map<std::string, std::string> audit_fields = {
      {"actor", agent.spec.id.id}, {"device", device}, {"action", action}};
  if (env.sender) audit_fields["issued_by"] = env.sender->id;
  audit.payload = make_agent_payload(agent, audit_fields);
  publish_envelope(agent, topic_of("agents/audit"), audit);

  start_actuation(device, action,
                  env.correlation_id ? std::optional(env.correlation_id->hex)
                                     : std::nullopt,
                  env.sender ? std::optional(env.sender->id) : std::nullopt,
                  /*via_gateway=*/false, /*audited=*/true);
}

void World::start_actuation(const std::string& device, const std::string& action,
                            std::optional<std::string> corr,
                            std::optional<std::string> issued_by,
                            bool via_gateway, bool audited) {
  Device& dev = devices.at(device);
  ActuationRecord rec;
  rec.device = device;
  rec.kind = dev.spec.kind;
  rec.action = action;
  rec.corr_id = std::move(corr);
  rec.issued_by = std::move(issued_by);
  rec.via_gateway = via_gateway;
  rec.audited = audited;
  rec.start_us = clock.now_us;
  rec.complete_us = clock.now_us + dev.actuation_duration_us;
  actuations.push_back(rec);

  queue.schedule(clock, rec.complete_us, "actuation_complete",
                 device + " " + action, [this, device, action] {
                   Device& d = devices.at(device);
                   d.state = state_after(action, d.state);
                 });
}

// --- echo benchmark -----------------------------------------------------

void World::start_echo_bench(std::size_t bench_index) {
  if (bench_index >= echo_benches.size()) return;
  echo_send_next(bench_index);
}

void World::echo_send_next(std::size_t bench_index) {
  EchoBenchState& bench = echo_benches[bench_index];
  if (bench.sent >= bench.spec.count) {
    bench.finished = true;
    const std::size_t next = bench_index + 1;
    if (next < echo_benches.size()) {
      const Micros at = std::max(clock.now_us, echo_benches[next].spec.start_us);
      queue.schedule(clock, at, "echo_bench_start", echo_benches[next].spec.name,
                     [this, next] { start_echo_bench(next); });
    }
    return;
  }

  AgentRuntime& orch = orchestrator();
  const CorrelationId corr = CorrelationId::generate(rng);
  Envelope probe;
  probe.sender = orch.spec.id;
  probe.msg_type = MsgType::echo_probe;
  probe.timestamp_us = clock.now_us;
  probe.correlation_id = corr;
  probe.payload = make_filler(bench.spec.payload_bytes);
  publish_envelope(orch, topic_of(inbox_of(bench.spec.target)), probe);

  bench.sent += 1;
  bench.outstanding_corr = corr.hex;
  bench.sent_at_us = clock.now_us;
  bench.timeout_event = queue.schedule(
      clock, clock.now_us + bench.spec.timeout_us, "echo_timeout",
      bench.spec.name, [this, bench_index, corr_hex = corr.hex] {
        echo_on_timeout(bench_index, corr_hex);
      });
}

void World::echo_on_reply(AgentRuntime& /*orch*/, const Envelope& env) {
  if (!env.correlation_id) return;
  for (std::size_t i = 0; i < echo_benches.size(); ++i) {
    EchoBenchState& bench = echo_benches[i];
    if (bench.outstanding_corr &&
        *bench.outstanding_corr == env.correlation_id->hex) {
      bench.samples.push_back(clock.now_us - bench.sent_at_us);
      bench.outstanding_corr.reset();
      queue.cancel(bench.timeout_event);
      echo_send_next(i);
      return;
    }
  }
}

void World::echo_on_timeout(std::size_t bench_index, std::string corr) {
  EchoBenchState& bench = echo_benches[bench_index];
  if (bench.outstanding_corr && *bench.outstanding_corr == corr) {
    bench.timeouts += 1;
    bench.outstanding_corr.reset();
    echo_send_next(bench_index);
  }
}

// --- inference ----------------------------------------------------------

void World::run_inference(const std::string& agent_id, std::size_t request_bytes,
                          const std::string& label) {
  AgentRuntime& agent = *find_agent(agent_id);
  const InferenceSpec& chain = agent.spec.inference;

  InferenceRecord rec;
  rec.at_us = clock.now_us;
  rec.agent = agent_id;
  rec.request_bytes = request_bytes;
  rec.label = label;

  const bool has_local = chain.local_capacity_bytes > 0;
  if (has_local && request_bytes <= chain.local_capacity_bytes) {
    rec.outcome = "local";  // zero egress
    inferences.push_back(std::move(rec));
    return;
  }
  if (has_local) rec.local_cancelled = true;  // CANCELLED status, code 499 analog

  if (!chain.cloud_host) {
    rec.outcome = "cancelled";
    inferences.push_back(std::move(rec));
    return;
  }
  const std::string host = *chain.cloud_host;
  const EgressDecision decision = authorize_egress(
      cfg.boundary, agent_id, host, label, request_bytes);
  if (decision == EgressDecision::deny) {
    rec.outcome = "sovereignty_denied";
    inferences.push_back(std::move(rec));
    return;
  }

  auto host_it = cfg.dns.hosts.find(host);
  const std::string ip =
      host_it != cfg.dns.hosts.end() ? host_it->second : "203.0.113.10";
  const unsigned retries = std::max(1u, cfg.dns.retry_count);
  for (unsigned i = 0; i < retries; ++i) {
    dns_log.push_back(DnsEvent{clock.now_us + i * cfg.dns.retry_interval_us,
                               agent_id, host, ip});
  }
  rec.dns_events = retries;
  rec.outcome = has_local ? "cloud_fallback" : "cloud";
  const EgressCause cause =
      has_local ? EgressCause::inference_fallback : EgressCause::cloud_api;
  const bool marked = decision == EgressDecision::allow_marked;
  const std::size_t record_index = inferences.size();
  inferences.push_back(std::move(rec));

  const Micros egress_at = clock.now_us + retries * cfg.dns.retry_interval_us;
  AgentRuntime* self = &agent;
  queue.schedule(
      clock, egress_at, "cloud_egress", agent_id + " -> " + host,
      [this, self, agent_id, host, request_bytes, cause, marked, label,
       record_index] {
        ledger.append(EgressEntry{clock.now_us, agent_id, host, request_bytes,
                                  cause, marked});
        if (marked) {
          // Boundary crossing marker on the audit topic.
          Envelope marker;
          marker.sender = self->spec.id;
          marker.msg_type = MsgType::audit;
          marker.timestamp_us = clock.now_us;
          marker.correlation_id = CorrelationId::generate(rng);
          marker.payload = make_agent_payload(
              *self, {{"boundary", "cloud_egress"},
                      {"host", host},
                      {"bytes", std::to_string(request_bytes)},
                      {"label", label}});
          publish_envelope(*self, Topic{{"agents", "audit"}}, marker);
          inferences[record_index].marker_published = true;
        }
      });
}

}  // namespace swarmsim
