#include "swarmsim/attacks.hpp"

#include <algorithm>

#include "swarmsim/digest.hpp"

namespace swarmsim {

namespace {

Topic topic_of(const std::string& path) {
  auto t = Topic::parse(path);
  if (!t) throw SimError("bad topic: " + path);
  return *t;
}

std::string inbox_of(const std::string& id) { return "agents/inbox/" + id; }

std::string pick_target_device(const ScenarioConfig& cfg,
                               const AttackSpec& spec) {
  if (!spec.device.empty()) return spec.device;
  for (const auto& d : cfg.devices) {
    if (d.kind == DeviceKind::lock) return d.id;
  }
  for (const auto& d : cfg.devices) {
    if (d.kind != DeviceKind::sensor) return d.id;
  }
  return "";
}

std::string pick_claim(const ScenarioConfig& cfg, const AttackSpec& spec,
                       AttackKind kind) {
  if (!spec.claim.empty()) return spec.claim;
  if (kind == AttackKind::ForgedFlood) {
    const AgentSpec* mobile = cfg.first_with_role(Role::mobile);
    if (mobile) return mobile->id.id;
  }
  const AgentSpec* orch = cfg.orchestrator();
  return orch ? orch->id.id : "rupert";
}

}  // namespace

AttackSpec suite_defaults(const ScenarioConfig& cfg, AttackKind kind) {
  AttackSpec spec;
  spec.kind = kind;
  spec.at_us = 2'000'000;
  spec.device = pick_target_device(cfg, spec);
  spec.action = "unlock";
  spec.claim = pick_claim(cfg, spec, kind);
  if (kind == AttackKind::InducedFallback) {
    const AgentSpec* mobile = cfg.first_with_role(Role::mobile);
    if (mobile) spec.agent = mobile->id.id;
    spec.label = "sensor_dump";
  }
  if (kind == AttackKind::PartitionBlackout) {
    const AgentSpec* bridge = cfg.first_with_role(Role::bridge);
    if (bridge) spec.link = bridge->link;
    spec.action = "lock";
  }
  return spec;
}

void install_attack(World& world, const AttackSpec& raw) {
  AttackSpec spec = raw;
  if (spec.device.empty()) spec.device = pick_target_device(world.cfg, spec);
  if (spec.action.empty()) spec.action = "unlock";
  if (spec.claim.empty()) spec.claim = pick_claim(world.cfg, spec, spec.kind);
  if (spec.agent.empty()) {
    const AgentSpec* mobile = world.cfg.first_with_role(Role::mobile);
    if (mobile) spec.agent = mobile->id.id;
  }
  if (spec.link.empty()) {
    const AgentSpec* bridge = world.cfg.first_with_role(Role::bridge);
    if (bridge) spec.link = bridge->link;
  }

  const std::size_t index = world.attack_state.size();
  world.attack_state.push_back(AttackRuntime{});
  world.attack_state[index].spec = spec;
  World* w = &world;

  switch (spec.kind) {
    case AttackKind::MissingSender: {
      w->queue.schedule(
          w->clock, spec.at_us, "attack", "MissingSender", [w, index, spec] {
            AttackRuntime& rt = w->attack_state[index];
            const SessionId rogue = w->rogue_session();
            Envelope env;  // sender deliberately absent
            env.msg_type = MsgType::command;
            env.timestamp_us = w->clock.now_us;
            env.correlation_id = CorrelationId::generate(w->rng);
            env.payload = make_raw_payload(
                {{"device", spec.device}, {"action", spec.action}});
            rt.corr_ids.push_back(env.correlation_id->hex);
            w->client_publish(rogue,
                              topic_of(inbox_of(w->bridge().spec.id.id)),
                              encode_envelope(env));
          });
      break;
    }
    case AttackKind::SpoofedSender: {
      w->queue.schedule(
          w->clock, spec.at_us, "attack", "SpoofedSender", [w, index, spec] {
            AttackRuntime& rt = w->attack_state[index];
            const SessionId rogue = w->rogue_session();
            Envelope env;
            env.sender = AgentId{spec.claim};
            env.msg_type = MsgType::command;
            env.timestamp_us = w->clock.now_us;
            env.correlation_id = CorrelationId::generate(w->rng);
            env.payload = make_raw_payload({{"from", spec.claim},
                                            {"device", spec.device},
                                            {"action", spec.action}});
            rt.corr_ids.push_back(env.correlation_id->hex);
            std::optional<AuthBlock> forged;
            if (w->cfg.posture == BrokerMode::hardened) {
              // The attacker has no keys; it fabricates an auth block that
              // names the victim's key id with a garbage MAC.
              AuthBlock fake;
              auto kid = w->cfg.keystore.key_id_for_sender(spec.claim);
              fake.key_id = kid ? *kid : "k-forged";
              fake.nonce_hex = CorrelationId::generate(w->rng).hex;
              fake.counter = 7;
              fake.signature = make_filler(32);
              forged = std::move(fake);
            }
            w->client_publish(rogue,
                              topic_of(inbox_of(w->bridge().spec.id.id)),
                              encode_envelope(env, forged));
          });
      break;
    }
    case AttackKind::Replay: {
      // A legitimate command is issued, captured verbatim off the bus, and
      // republished after the actuation completes.
      w->queue.schedule(w->clock, spec.at_us, "attack", "Replay(setup)",
                        [w, index, spec] {
                          AttackRuntime& rt = w->attack_state[index];
                          const SessionId rogue = w->rogue_session();
                          auto res = w->broker.subscribe(
                              rogue, TopicFilter{{"agents", "mirror"}}, w->policy);
                          rt.mirror_capture_granted = res.granted;
                          rt.legit_corr = w->issue_command(
                              w->orchestrator().spec.id.id, spec.device, "lock");
                        });
      const Micros replay_at = spec.at_us + 1'500'000;
      w->queue.schedule(
          w->clock, replay_at, "attack", "Replay", [w, index] {
            AttackRuntime& rt = w->attack_state[index];
            const PublishLogEntry* captured = w->find_publish(
                rt.legit_corr, w->orchestrator().spec.id.id);
            if (!captured) return;  // command never reached the broker
            w->client_publish(w->rogue_session(),
                              topic_of(captured->record.topic),
                              captured->record.bytes);
          });
      break;
    }
    case AttackKind::DirectSafetyPublish: {
      w->queue.schedule(
          w->clock, spec.at_us, "attack", "DirectSafetyPublish",
          [w, index, spec] {
            AttackRuntime& rt = w->attack_state[index];
            const SessionId rogue = w->rogue_session();
            Envelope env;
            env.sender = AgentId{"rogue"};
            env.msg_type = MsgType::command;
            env.timestamp_us = w->clock.now_us;
            env.correlation_id = CorrelationId::generate(w->rng);
            env.payload = make_raw_payload({{"action", spec.action}});
            rt.corr_ids.push_back(env.correlation_id->hex);
            w->client_publish(rogue, topic_of("iot/actuate/" + spec.device),
                              encode_envelope(env));
          });
      break;
    }
    case AttackKind::EmbeddedStateDrift: {
      w->queue.schedule(
          w->clock, spec.at_us, "attack", "EmbeddedStateDrift(seed)",
          [w, spec] {
            AgentRuntime& orch = w->orchestrator();
            const Bytes content = to_bytes(spec.content);
            if (w->cfg.state_mode == StateMode::embedded) {
              orch.doc_copies[spec.doc] = content;
              for (auto& [id, agent] : w->agents) {
                if (id == orch.spec.id.id) continue;
                Envelope env;
                env.sender = orch.spec.id;
                env.msg_type = MsgType::status;
                env.timestamp_us = w->clock.now_us;
                env.correlation_id = CorrelationId::generate(w->rng);
                env.payload = make_agent_payload(
                    orch, {{"doc", spec.doc}, {"content_hex", hex_encode(content)}});
                w->publish_envelope(orch, topic_of(inbox_of(id)), env);
              }
            } else {
              const ObjectHash h = w->store.put_object(content);
              w->store.create_ref(spec.doc);
              auto c0 = w->store.commit(spec.doc, std::nullopt,
                                        orch.spec.id.id, w->clock.now_us,
                                        {{"doc", h}}, "seed");
              const CommitId commit = std::get<CommitId>(c0);
              orch.doc_views[spec.doc] = DocView{spec.doc, commit, "doc"};
              for (auto& [id, agent] : w->agents) {
                if (id == orch.spec.id.id) continue;
                Envelope env;
                env.sender = orch.spec.id;
                env.msg_type = MsgType::state_ref;
                env.timestamp_us = w->clock.now_us;
                env.correlation_id = CorrelationId::generate(w->rng);
                env.payload = make_agent_payload(orch, {{"doc", spec.doc},
                                                        {"ref", spec.doc},
                                                        {"commit", commit},
                                                        {"path", "doc"}});
                w->publish_envelope(orch, topic_of(inbox_of(id)), env);
              }
            }
          });
      // Both non-orchestrator agents edit "concurrently" (same virtual
      // instant, ordered by event sequence).
      const Micros edit_at = spec.at_us + 300'000;
      std::vector<std::string> editors;
      for (const auto& a : world.cfg.agents) {
        if (a.role != Role::orchestrator) editors.push_back(a.id.id);
      }
      for (const std::string& editor : editors) {
        w->queue.schedule(
            w->clock, edit_at, "attack", "EmbeddedStateDrift(edit " + editor + ")",
            [w, index, spec, editor] {
              AttackRuntime& rt = w->attack_state[index];
              AgentRuntime& agent = *w->find_agent(editor);
              if (w->cfg.state_mode == StateMode::embedded) {
                auto it = agent.doc_copies.find(spec.doc);
                if (it == agent.doc_copies.end()) return;
                Bytes edited = it->second;
                const std::string note = "\n" + editor + ": addendum";
                edited.insert(edited.end(), note.begin(), note.end());
                agent.doc_copies[spec.doc] = edited;
                for (auto& [id, other] : w->agents) {
                  if (id == editor) continue;
                  Envelope env;
                  env.sender = agent.spec.id;
                  env.msg_type = MsgType::status;
                  env.timestamp_us = w->clock.now_us;
                  env.correlation_id = CorrelationId::generate(w->rng);
                  env.payload = make_agent_payload(
                      agent,
                      {{"doc", spec.doc}, {"content_hex", hex_encode(edited)}});
                  w->publish_envelope(agent, topic_of(inbox_of(id)), env);
                }
              } else {
                auto view_it = agent.doc_views.find(spec.doc);
                if (view_it == agent.doc_views.end()) return;
                DocView view = view_it->second;
                auto base = w->store.resolve(view.ref, view.path);
                if (!base) return;
                Bytes edited = *base;
                const std::string note = "\n" + editor + ": addendum";
                edited.insert(edited.end(), note.begin(), note.end());
                const ObjectHash h = w->store.put_object(edited);
                auto result = w->store.commit(
                    view.ref, view.commit, editor, w->clock.now_us,
                    {{view.path, h}}, editor + " edit");
                if (auto* conflict = std::get_if<ConflictReport>(&result)) {
                  w->conflicts.push_back(ConflictEventRecord{
                      w->clock.now_us, *conflict, editor});
                  rt.corr_ids.push_back("conflict:" + editor);
                  // Losing writer re-resolves the advanced head; no merge.
                  const RefHead* head = w->store.find_ref(view.ref);
                  if (head && head->current) {
                    agent.doc_views[spec.doc].commit = *head->current;
                  }
                } else {
                  const CommitId commit = std::get<CommitId>(result);
                  agent.doc_views[spec.doc].commit = commit;
                  for (auto& [id, other] : w->agents) {
                    if (id == editor) continue;
                    Envelope env;
                    env.sender = agent.spec.id;
                    env.msg_type = MsgType::state_ref;
                    env.timestamp_us = w->clock.now_us;
                    env.correlation_id = CorrelationId::generate(w->rng);
                    env.payload = make_agent_payload(agent, {{"doc", spec.doc},
                                                             {"ref", view.ref},
                                                             {"commit", commit},
                                                             {"path", view.path}});
                    w->publish_envelope(agent, topic_of(inbox_of(id)), env);
                  }
                }
              }
            });
      }
      break;
    }
    case AttackKind::ForgedFlood: {
      for (std::size_t i = 0; i < spec.flood_k; ++i) {
        const Micros at = spec.at_us + i * spec.flood_spacing_us;
        w->queue.schedule(
            w->clock, at, "attack", "ForgedFlood(" + std::to_string(i) + ")",
            [w, index, spec, i] {
              AttackRuntime& rt = w->attack_state[index];
              const SessionId rogue = w->rogue_session();
              Envelope env;
              env.sender = AgentId{spec.claim};
              env.msg_type = MsgType::command;
              env.timestamp_us = w->clock.now_us;
              env.correlation_id = CorrelationId::generate(w->rng);
              env.payload = make_raw_payload({{"from", spec.claim},
                                              {"tag", "forged"},
                                              {"device", spec.device},
                                              {"action", spec.action},
                                              {"note", "zzz-" + std::to_string(i)}});
              rt.corr_ids.push_back(env.correlation_id->hex);
              w->client_publish(
                  rogue, topic_of(inbox_of(w->orchestrator().spec.id.id)),
                  encode_envelope(env));
            });
      }
      const Micros legit_at =
          spec.at_us + spec.flood_k * spec.flood_spacing_us + 100'000;
      w->queue.schedule(
          w->clock, legit_at, "attack", "ForgedFlood(legit command)",
          [w, index, spec] {
            AttackRuntime& rt = w->attack_state[index];
            Envelope env;
            env.sender = AgentId{"operator"};
            env.msg_type = MsgType::command;
            env.timestamp_us = w->clock.now_us;
            env.correlation_id = CorrelationId::generate(w->rng);
            env.payload = make_raw_payload({{"from", "operator"},
                                            {"device", spec.device},
                                            {"action", "lock"}});
            rt.legit_corr = env.correlation_id->hex;
            std::optional<AuthBlock> auth;
            if (w->cfg.signing_enabled()) {
              if (auto kid = w->cfg.keystore.key_id_for_sender("operator")) {
                auth = sign_envelope(env, *kid, w->cfg.keystore, w->rng,
                                     w->operator_counters());
              }
            }
            w->client_publish(
                w->operator_session(),
                topic_of(inbox_of(w->orchestrator().spec.id.id)),
                encode_envelope(env, auth));
          });
      break;
    }
    case AttackKind::InducedFallback: {
      w->queue.schedule(w->clock, spec.at_us, "attack", "InducedFallback",
                        [w, spec] {
                          w->run_inference(spec.agent, spec.request_bytes,
                                           spec.label.empty() ? "sensor_dump"
                                                              : spec.label);
                        });
      break;
    }
    case AttackKind::PartitionBlackout: {
      w->queue.schedule(
          w->clock, spec.at_us, "attack", "PartitionBlackout(command)",
          [w, index, spec] {
            AttackRuntime& rt = w->attack_state[index];
            rt.legit_corr = w->issue_command(w->orchestrator().spec.id.id,
                                             spec.device, spec.action);
          });
      PartitionSpec part;
      part.link = spec.link;
      part.start_us = spec.at_us + spec.lead_us;
      part.duration_us = spec.duration_us;
      part.network_recovery_us = spec.network_recovery_us;
      part.bridge_setup_us = spec.bridge_setup_us;
      w->attack_state[index].used_partition = true;
      w->queue.schedule(w->clock, part.start_us, "attack",
                        "PartitionBlackout(partition)",
                        [w, part] { w->apply_partition(part); });
      break;
    }
  }
}

namespace {

std::string response_string(bool attempted, bool accepted,
                            const std::optional<RejectReason>& reason) {
  if (!attempted) return "not attempted";
  if (accepted) return "Accepted";
  std::string out = "Rejected";
  if (reason) out += std::string(" (") + to_string(*reason) + ")";
  return out;
}

}  // namespace

AttackOutcome extract_outcome(const World& world, const AttackRuntime& rt) {
  const AttackSpec& spec = rt.spec;
  AttackOutcome out;
  out.kind = spec.kind;
  out.label = attack_label(spec.kind);

  auto fill_from_publish = [&](const std::string& corr,
                               const std::string& principal) {
    const PublishLogEntry* entry = world.find_publish(corr, principal);
    if (!entry) return;
    out.attempted = true;
    out.accepted = entry->record.accepted;
    out.reject_reason = entry->record.reason;
  };

  switch (spec.kind) {
    case AttackKind::MissingSender:
    case AttackKind::SpoofedSender:
    case AttackKind::DirectSafetyPublish: {
      if (!rt.corr_ids.empty()) {
        fill_from_publish(rt.corr_ids.front(), "rogue");
        out.executions = world.actuation_count_for_corr(rt.corr_ids.front());
        out.audit_records = world.audit_count_for_corr(rt.corr_ids.front());
      }
      if (out.accepted) {
        if (spec.kind == AttackKind::MissingSender) out.impact = "Untraceable command";
        if (spec.kind == AttackKind::SpoofedSender) {
          out.impact = "Rogue agent frames others";
          out.evidence["framed_as"] = spec.claim;
        }
        if (spec.kind == AttackKind::DirectSafetyPublish) {
          out.impact = "Agent logic bypassed";
          out.evidence["audit_records"] = std::to_string(out.audit_records);
        }
      } else {
        out.impact = "None (blocked)";
      }
      out.evidence["device_executions"] = std::to_string(out.executions);
      break;
    }
    case AttackKind::Replay: {
      fill_from_publish(rt.legit_corr, "rogue");
      out.executions = world.actuation_count_for_corr(rt.legit_corr);
      out.audit_records = world.audit_count_for_corr(rt.legit_corr);
      out.impact = out.accepted ? "Command re-executed" : "None (blocked)";
      out.evidence["total_executions_for_corr"] = std::to_string(out.executions);
      out.evidence["audits_for_corr"] = std::to_string(out.audit_records);
      out.evidence["mirror_capture"] =
          rt.mirror_capture_granted ? "granted" : "denied";
      break;
    }
    case AttackKind::EmbeddedStateDrift: {
      out.attempted = true;
      const std::size_t divergence = world.measure_divergence(spec.doc);
      out.detections = world.conflicts.size();
      out.evidence["divergent_copies"] = std::to_string(divergence);
      out.evidence["conflict_events"] = std::to_string(out.detections);
      out.accepted = world.cfg.state_mode == StateMode::embedded;
      if (world.cfg.state_mode == StateMode::embedded) {
        out.impact = "Silent context drift (" + std::to_string(divergence) +
                     " divergent copies)";
      } else {
        out.impact = "Conflict detected; single canonical copy";
      }
      break;
    }
    case AttackKind::ForgedFlood: {
      out.attempted = !rt.corr_ids.empty();
      if (!rt.corr_ids.empty()) {
        fill_from_publish(rt.corr_ids.front(), "rogue");
      }
      const AgentRuntime& orch =
          world.agents.at(world.cfg.orchestrator()->id.id);
      const LockoutReport lockout =
          lockout_report(orch.trust, world.cfg.duration_us);
      const bool obeyed_first =
          !rt.legit_corr.empty() &&
          world.actuation_count_for_corr(rt.legit_corr) > 0;
      const bool obeyed_after_oob =
          !rt.retry_corr.empty() &&
          world.actuation_count_for_corr(rt.retry_corr) > 0;
      out.executions = obeyed_first || obeyed_after_oob ? 1 : 0;
      out.detections = orch.trust.quarantine.size() + lockout.refused_commands;
      out.evidence["legit_command_obeyed"] = obeyed_first ? "yes" : "no";
      out.evidence["oob_required"] =
          orch.trust.oob_confirmations > 0 ? "yes" : "no";
      out.evidence["obeyed_after_oob"] = obeyed_after_oob ? "yes" : "no";
      out.evidence["lockout_us"] = std::to_string(lockout.lockout_us);
      out.evidence["quarantined"] = std::to_string(orch.trust.quarantine.size());
      out.evidence["refused_verified"] = std::to_string(lockout.refused_verified);
      if (lockout.lockout_us > 0) {
        out.impact = "Operator lockout; out-of-band recovery required";
      } else if (!orch.trust.quarantine.empty()) {
        out.impact = "Flood quarantined; operator unaffected";
      } else {
        out.impact = obeyed_first ? "Flood blocked; operator unaffected"
                                  : "No effect";
      }
      break;
    }
    case AttackKind::InducedFallback: {
      out.attempted = true;
      std::size_t egress_entries = 0;
      std::size_t egress_bytes = 0;
      std::size_t markers = 0;
      for (const auto& e : world.ledger.entries) {
        if (e.agent == spec.agent) {
          ++egress_entries;
          egress_bytes += e.bytes;
          if (e.marked) ++markers;
        }
      }
      std::size_t dns = 0;
      for (const auto& q : world.dns_log) {
        if (q.agent == spec.agent) ++dns;
      }
      std::string inference_outcome = "none";
      for (const auto& inf : world.inferences) {
        if (inf.agent == spec.agent && inf.at_us >= spec.at_us) {
          inference_outcome = inf.outcome;
        }
      }
      out.accepted = egress_entries > 0;
      out.executions = 0;
      out.detections = markers;
      out.evidence["egress_entries"] = std::to_string(egress_entries);
      out.evidence["egress_bytes"] = std::to_string(egress_bytes);
      out.evidence["dns_events"] = std::to_string(dns);
      out.evidence["audit_markers"] = std::to_string(markers);
      out.evidence["coordination_anomalies"] = "0";
      out.evidence["inference_outcome"] = inference_outcome;
      if (inference_outcome == "sovereignty_denied") {
        out.impact = "Fallback denied by boundary policy";
      } else if (egress_entries > 0 && markers == 0) {
        out.impact = "Silent egress; DNS-layer visibility only";
      } else if (markers > 0) {
        out.impact = "Egress crossed with audit marker";
      } else {
        out.impact = "No egress";
      }
      break;
    }
    case AttackKind::PartitionBlackout: {
      out.attempted = true;
      const FailoverRow* row = nullptr;
      for (const auto& r : world.failover_rows) {
        if (r.spec.link == spec.link &&
            r.spec.start_us == spec.at_us + spec.lead_us) {
          if (!row || r.blackout_us > row->blackout_us) row = &r;
        }
      }
      auto vis = world.audit_visibility_us(rt.legit_corr);
      std::optional<Micros> complete;
      for (const auto& a : world.actuations) {
        if (a.corr_id && *a.corr_id == rt.legit_corr) complete = a.complete_us;
      }
      std::size_t unaudited = 0;
      if (complete && (!vis || *vis > *complete)) unaudited = 1;
      out.executions = world.actuation_count_for_corr(rt.legit_corr);
      out.audit_records = world.audit_count_for_corr(rt.legit_corr);
      out.accepted = out.executions > 0;
      Micros gap = 0;
      for (const auto& c : world.issued_commands) {
        if (c.corr_id == rt.legit_corr && vis && *vis >= c.publish_us) {
          gap = *vis - c.publish_us;
        }
      }
      if (row) {
        out.evidence["blackout_us"] = std::to_string(row->blackout_us);
        out.evidence["reconnect_us"] = std::to_string(row->reconnect_delay_us);
      }
      out.evidence["unaudited_actuations"] = std::to_string(unaudited);
      out.evidence["audit_gap_us"] = std::to_string(gap);
      out.detections = unaudited;
      if (row) {
        const double secs = static_cast<double>(row->blackout_us) / 1e6;
        char buf[64];
        std::snprintf(buf, sizeof buf, "Unaudited actuation window %.3f s", secs);
        out.impact = buf;
      } else {
        out.impact = "Partition had no effect";
      }
      break;
    }
  }

  out.broker_response = response_string(out.attempted, out.accepted,
                                        out.reject_reason);
  if (spec.kind == AttackKind::InducedFallback ||
      spec.kind == AttackKind::EmbeddedStateDrift ||
      spec.kind == AttackKind::PartitionBlackout) {
    // These do not stand or fall on a single broker verdict.
    out.broker_response = "n/a";
  }
  return out;
}

AttackOutcome run_attack(const ScenarioConfig& cfg, const AttackSpec& spec) {
  ScenarioConfig one = cfg;
  one.attacks = {spec};
  World world(std::move(one));
  world.init();
  world.run();
  return extract_outcome(world, world.attack_state.at(0));
}

std::vector<AttackOutcome> run_suite(const ScenarioConfig& cfg) {
  std::vector<AttackOutcome> out;
  for (AttackKind kind : kAllAttackKinds) {
    out.push_back(run_attack(cfg, suite_defaults(cfg, kind)));
  }
  return out;
}

}  // namespace swarmsim
