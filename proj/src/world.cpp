#include "swarmsim/world.hpp"

#include <algorithm>
#include <cmath>

#include "swarmsim/digest.hpp"

namespace swarmsim {

namespace {

Topic topic_of(const std::string& path) {
  auto t = Topic::parse(path);
  if (!t) throw SimError("bad topic: " + path);
  return *t;
}

TopicFilter filter_of(const std::string& path) {
  auto f = TopicFilter::parse(path);
  if (!f) throw SimError("bad filter: " + path);
  return *f;
}

std::string inbox_of(const std::string& id) { return "agents/inbox/" + id; }

}  // namespace

World::World(ScenarioConfig config)
    : cfg(std::move(config)), rng(cfg.seed) {
  policy.mode = cfg.posture;
  policy.acl = cfg.acl;
  policy.keystore = &cfg.keystore;
  policy.replay = &broker_replay;
  policy.mirror_topic = topic_of("agents/mirror");
  oob.response_delay_us = cfg.trust.oob_response_delay_us;
}

const LinkProfile& World::link_profile(const std::string& name) const {
  const LinkProfile* p = cfg.profile(name);
  if (!p) throw SimError("unknown link profile: " + name);
  return *p;
}

Micros World::full_latency_sample(const std::string& link,
                                  std::size_t payload_len) {
  return sample_latency(link_profile(link), payload_len, rng);
}

bool World::session_unreachable(const BrokerSession& s, Micros t) const {
  if (s.parked) return true;
  if (t < s.unavailable_until) return true;
  auto it = links.find(s.link);
  return it != links.end() && it->second.is_down(t);
}

SessionId World::connect_client(const std::string& principal,
                                const std::string& link) {
  link_profile(link);  // existence check
  return broker.connect(principal, link);
}

SessionId World::rogue_session() {
  if (rogue_ == 0) {
    rogue_ = connect_client("rogue", monitor_link_name);
  }
  return rogue_;
}

SessionId World::operator_session() {
  if (operator_ == 0) {
    operator_ = connect_client("operator", monitor_link_name);
  }
  return operator_;
}

void World::init() {
  for (const LinkProfile& p : cfg.link_profiles) links.emplace(p.name, LinkState{});

  const AgentSpec* orch = cfg.orchestrator();
  monitor_link_name =
      !cfg.monitor_link.empty() ? cfg.monitor_link : (orch ? orch->link : "");

  connect_roster();
  schedule_workloads();
  schedule_partitions();
  schedule_attacks();
}

void World::connect_roster() {
  for (const AgentSpec& spec : cfg.agents) {
    AgentRuntime rt;
    rt.spec = spec;
    rt.session = broker.connect(spec.id.id, spec.link);
    char tag[17];
    std::snprintf(tag, sizeof tag, "%016llx",
                  static_cast<unsigned long long>(rng.next_u64()));
    rt.beacon_tag = tag;
    rt.trust.mode = cfg.trust_mode;
    rt.trust.distrust_threshold = cfg.trust.distrust_threshold;
    session_agent[rt.session] = spec.id.id;

    broker.subscribe(rt.session, filter_of(inbox_of(spec.id.id)), policy);
    broker.subscribe(rt.session, filter_of("agents/broadcast"), policy);
    if (spec.role == Role::orchestrator) {
      broker.subscribe(rt.session, filter_of("agents/audit"), policy);
      broker.subscribe(rt.session, filter_of("iot/sensor/+"), policy);
    }
    if (spec.role == Role::bridge) {
      broker.subscribe(rt.session, filter_of("iot/actuate/+"), policy);
    }
    agents.emplace(spec.id.id, std::move(rt));
  }

  for (const DeviceSpec& spec : cfg.devices) {
    Device dev;
    dev.spec = spec;
    dev.actuation_duration_us = cfg.device_duration(spec);
    dev.state = spec.initial_state.empty() ? default_initial_state(spec.kind)
                                           : spec.initial_state;
    devices.emplace(spec.id, std::move(dev));
  }

  if (!monitor_link_name.empty()) {
    monitor = broker.connect("monitor", monitor_link_name);
    broker.subscribe(monitor, filter_of("agents/mirror"), policy);
  }

  // First heartbeat one interval in; ticks re-arm themselves.
  for (auto& [id, rt] : agents) {
    const Micros interval = rt.spec.heartbeat_interval_us;
    AgentRuntime* agent = &rt;
    queue.schedule(clock, interval, "heartbeat_arm", id,
                   [this, agent] { heartbeat_tick(*agent); });
  }
}

void World::schedule_workloads() {
  const Workload& w = cfg.workload;

  if (w.command_load && w.command_load->n > 0) {
    const CommandLoad& load = *w.command_load;
    std::vector<std::string> targets = load.devices;
    if (targets.empty()) {
      for (const auto& d : cfg.devices) {
        if (d.kind != DeviceKind::sensor) targets.push_back(d.id);
      }
    }
    std::vector<std::string> actions = load.action_types;
    if (actions.empty()) actions = {"lock", "unlock", "on", "off", "toggle"};
    const std::string issuer =
        load.issuer.empty() ? cfg.orchestrator()->id.id : load.issuer;
    for (std::size_t i = 0; i < load.n; ++i) {
      const Micros at = load.start_us + i * load.interval_us;
      const std::string device = targets[i % targets.size()];
      const std::string action = actions[i % actions.size()];
      queue.schedule(clock, at, "command_load", device + " " + action,
                     [this, issuer, device, action] {
                       issue_command(issuer, device, action);
                     });
    }
  }

  if (w.sensor_load && w.sensor_load->n > 0) {
    const SensorLoad& load = *w.sensor_load;
    std::vector<std::string> sensors = load.devices;
    if (sensors.empty()) {
      for (const auto& d : cfg.devices) {
        if (d.kind == DeviceKind::sensor) sensors.push_back(d.id);
      }
    }
    if (!sensors.empty()) {
      for (std::size_t i = 0; i < load.n; ++i) {
        const Micros at = load.start_us + i * load.interval_us;
        const std::string device = sensors[i % sensors.size()];
        queue.schedule(clock, at, "sensor_read", device, [this, device, i] {
          AgentRuntime& b = bridge();
          Envelope env;
          env.sender = b.spec.id;
          env.msg_type = MsgType::status;
          env.timestamp_us = clock.now_us;
          env.correlation_id = CorrelationId::generate(rng);
          env.payload = make_agent_payload(
              b, {{"device", device}, {"value", std::to_string(i % 100)}});
          publish_envelope(b, topic_of("iot/sensor/" + device), env);
        });
      }
    }
  }

  if (w.status_load && w.status_load->n > 0) {
    const StatusLoad& load = *w.status_load;
    std::vector<std::string> ids;
    for (const auto& a : cfg.agents) ids.push_back(a.id.id);
    for (std::size_t i = 0; i < load.n; ++i) {
      const Micros at = load.start_us + i * load.interval_us;
      const std::string from = ids[i % ids.size()];
      const std::string to = ids[(i + 1) % ids.size()];
      queue.schedule(clock, at, "status_chatter", from + " -> " + to,
                     [this, from, to, i] {
                       AgentRuntime& a = *find_agent(from);
                       Envelope env;
                       env.sender = a.spec.id;
                       env.msg_type = MsgType::status;
                       env.timestamp_us = clock.now_us;
                       env.correlation_id = CorrelationId::generate(rng);
                       env.payload = make_agent_payload(
                           a, {{"note", "ok-" + std::to_string(i)}});
                       publish_envelope(a, topic_of(inbox_of(to)), env);
                     });
    }
  }

  for (std::size_t i = 0; i < w.echo_benchmarks.size(); ++i) {
    EchoBenchState st;
    st.spec = w.echo_benchmarks[i];
    echo_benches.push_back(std::move(st));
  }
  if (!echo_benches.empty()) {
    queue.schedule(clock, echo_benches[0].spec.start_us, "echo_bench_start",
                   echo_benches[0].spec.name, [this] { start_echo_bench(0); });
  }

  for (const InferenceRequest& req : w.inference_requests) {
    queue.schedule(clock, req.at_us, "inference_request",
                   req.agent + " " + std::to_string(req.request_bytes) + "B",
                   [this, req] {
                     run_inference(req.agent, req.request_bytes, req.label);
                   });
  }

  for (const ExplicitCommand& cmd : w.commands) {
    const std::string issuer =
        cmd.issuer.empty() ? cfg.orchestrator()->id.id : cmd.issuer;
    queue.schedule(clock, cmd.at_us, "command", cmd.device + " " + cmd.action,
                   [this, issuer, cmd] {
                     issue_command(issuer, cmd.device, cmd.action);
                   });
  }
}

void World::schedule_partitions() {
  for (const PartitionSpec& spec : cfg.partitions) {
    queue.schedule(clock, spec.start_us, "partition", spec.link,
                   [this, spec] { apply_partition(spec); });
  }
}

void World::schedule_attacks() {
  for (const AttackSpec& spec : cfg.attacks) install_attack(*this, spec);
}

bool World::step() {
  auto done = queue.step(clock);
  if (!done) return false;
  trace.push_back(std::move(*done));
  return true;
}

void World::run_until(Micros t_us) {
  while (true) {
    auto next = queue.next_fire_at();
    if (!next || *next > t_us) break;
    step();
  }
  if (clock.now_us < t_us) clock.now_us = t_us;
}

void World::run() { run_until(cfg.duration_us); }

// --- publish path ----------------------------------------------------

namespace {

// Payload length for serialization cost; undecodable frames charge their
// raw wire size.
std::size_t latency_len(const Bytes& bytes, std::size_t max_payload) {
  auto decoded = decode_envelope(bytes, DecodeMode::lenient, max_payload);
  if (auto* d = std::get_if<DecodedEnvelope>(&decoded)) {
    return d->env.payload.size();
  }
  return bytes.size();
}

bool is_audit_frame(const Bytes& bytes, std::size_t max_payload) {
  auto decoded = decode_envelope(bytes, DecodeMode::lenient, max_payload);
  if (auto* d = std::get_if<DecodedEnvelope>(&decoded)) {
    return d->env.msg_type == MsgType::audit;
  }
  return false;
}

}  // namespace

void World::client_publish(SessionId session, const Topic& topic, Bytes bytes) {
  BrokerSession* sess = broker.session(session);
  if (!sess || !sess->connected) throw SimError("publish on unknown session");
  const Micros now = clock.now_us;

  if (session_unreachable(*sess, now)) {
    auto agent_it = session_agent.find(session);
    if (agent_it != session_agent.end() &&
        is_audit_frame(bytes, cfg.max_payload_bytes)) {
      agents.at(agent_it->second)
          .outbox.push_back(PendingPublish{topic, std::move(bytes)});
    } else {
      missed.push_back(MissedDelivery{now, session, sess->principal,
                                      topic.str(), "publisher_unreachable"});
    }
    return;
  }

  const std::size_t plen = latency_len(bytes, cfg.max_payload_bytes);
  const Micros up = uplink_half(full_latency_sample(sess->link, plen));
  Micros arrival = now + up;
  if (arrival < sess->last_uplink_arrival_us) {
    arrival = sess->last_uplink_arrival_us;  // per-publisher FIFO
  }
  sess->last_uplink_arrival_us = arrival;
  queue.schedule(clock, arrival, "uplink",
                 sess->principal + " " + topic.str(),
                 [this, session, topic, bytes = std::move(bytes), now] {
                   broker_receive(session, topic, bytes, now);
                 });
}

void World::broker_receive(SessionId session, Topic topic, Bytes bytes,
                           Micros sent_at) {
  BrokerSession* sess = broker.session(session);
  const Micros now = clock.now_us;

  // Uplink in flight while the publisher's link failed: audits are retried
  // from the client outbox after reconnect, everything else is lost.
  auto link_it = links.find(sess->link);
  const bool interrupted =
      (link_it != links.end() && link_it->second.down_within(sent_at, now)) ||
      session_unreachable(*sess, now);
  if (interrupted) {
    auto agent_it = session_agent.find(session);
    if (agent_it != session_agent.end() &&
        is_audit_frame(bytes, cfg.max_payload_bytes)) {
      agents.at(agent_it->second)
          .outbox.push_back(PendingPublish{topic, std::move(bytes)});
    } else {
      missed.push_back(MissedDelivery{now, session, sess->principal,
                                      topic.str(), "uplink_partition"});
    }
    return;
  }

  DeliveryRecord rec = broker.publish(session, topic, bytes, policy, now,
                                      cfg.max_payload_bytes);
  std::vector<PlannedDelivery> deliveries = std::move(rec.deliveries);
  rec.deliveries.clear();
  const bool accepted = rec.accepted;
  publish_log.push_back(PublishLogEntry{sent_at, std::move(rec)});
  if (!accepted) return;  // silent to the publisher
  for (const PlannedDelivery& d : deliveries) schedule_delivery(d, now);
}

void World::schedule_delivery(const PlannedDelivery& d, Micros broker_ts) {
  BrokerSession* sub = broker.session(d.session);
  const LinkProfile& profile = link_profile(sub->link);
  const Micros down =
      downlink_half(full_latency_sample(sub->link, d.latency_payload_len));
  Micros arrival = broker_ts + down;
  if (arrival < sub->last_downlink_arrival_us) {
    arrival = sub->last_downlink_arrival_us;  // per-subscriber FIFO
  }
  sub->last_downlink_arrival_us = arrival;
  const bool lost = profile.loss_rate > 0.0 && rng.next_bool(profile.loss_rate);
  queue.schedule(clock, arrival, "deliver",
                 d.topic + " -> " + sub->principal,
                 [this, d, broker_ts, lost] { deliver(d, broker_ts, lost); });
}

void World::deliver(PlannedDelivery d, Micros scheduled_at, bool lost) {
  BrokerSession* sess = broker.session(d.session);
  const Micros now = clock.now_us;
  if (lost) {
    missed.push_back(
        MissedDelivery{now, d.session, sess->principal, d.topic, "loss"});
    return;
  }
  auto link_it = links.find(sess->link);
  if (link_it != links.end() &&
      link_it->second.down_within(scheduled_at, now)) {
    missed.push_back(
        MissedDelivery{now, d.session, sess->principal, d.topic, "partition"});
    return;
  }
  if (session_unreachable(*sess, now)) {
    missed.push_back(
        MissedDelivery{now, d.session, sess->principal, d.topic, "parked"});
    return;
  }

  if (d.session == monitor) {
    if (d.is_mirror) {
      MirrorReceipt receipt;
      receipt.receipt_us = now;
      if (auto frame = unwrap_mirror(d.bytes)) {
        receipt.broker_ts_us = frame->broker_ts_us;
        receipt.orig_topic = frame->orig_topic;
        auto decoded = decode_envelope(frame->frame, DecodeMode::lenient,
                                       cfg.max_payload_bytes);
        if (auto* dec = std::get_if<DecodedEnvelope>(&decoded)) {
          receipt.env = dec->env;
          receipt.has_auth = dec->auth.has_value();
          receipt.decode_ok = true;
        }
      }
      mirror_log.push_back(std::move(receipt));
    }
    return;
  }
  if (d.session == rogue_) {
    if (d.is_mirror) rogue_mirror_captures.push_back(d.bytes);
    return;
  }
  auto agent_it = session_agent.find(d.session);
  if (agent_it != session_agent.end()) {
    agent_on_delivery(agents.at(agent_it->second), d.topic, d.bytes,
                      d.is_mirror);
  }
  // operator and other external sessions consume silently
}

// --- partitions / failover --------------------------------------------

void World::apply_partition(const PartitionSpec& spec) {
  auto it = links.find(spec.link);
  if (it == links.end()) throw SimError("partition on unknown link " + spec.link);
  const Micros usable_at = spec.link_usable_at();
  it->second.add_down_interval(spec.start_us, usable_at);

  for (auto& [sid, sess] : broker.sessions()) {
    if (sess.link != spec.link || !sess.connected) continue;
    BrokerSession* s = broker.session(sid);
    const Micros delay = sample_reconnect_delay();
    const Micros restore_at = usable_at + delay;
    if (restore_at > s->unavailable_until) s->unavailable_until = restore_at;

    FailoverRow row;
    row.spec = spec;
    row.principal = sess.principal;
    row.reconnect_delay_us = delay;
    row.blackout_start_us = spec.start_us;
    row.blackout_end_us = restore_at;
    row.blackout_us = restore_at - spec.start_us;
    failover_rows.push_back(row);

    const SessionId session_id = sid;
    queue.schedule(clock, restore_at, "reconnect", sess.principal,
                   [this, session_id, delay] {
                     BrokerSession* s2 = broker.session(session_id);
                     reconnect_samples.push_back(ReconnectSample{
                         clock.now_us, s2->principal, delay});
                     auto agent_it = session_agent.find(session_id);
                     if (agent_it != session_agent.end()) {
                       flush_outbox(agents.at(agent_it->second));
                     }
                   });
  }
}

Micros World::sample_reconnect_delay() {
  long double d = static_cast<long double>(cfg.reconnect.base_delay_us);
  if (cfg.reconnect.jitter_median_us > 0.0) {
    d += std::llround(rng.next_lognormal(cfg.reconnect.jitter_median_us,
                                         cfg.reconnect.jitter_sigma));
  }
  return static_cast<Micros>(d);
}

void World::disconnect_session(SessionId session) {
  broker.disconnect(session);
}

Micros World::reconnect_session(SessionId session) {
  BrokerSession* s = broker.session(session);
  if (!s || !s->connected) throw SimError("reconnect of never-connected session");
  const Micros delay = sample_reconnect_delay();
  queue.schedule(clock, clock.now_us + delay, "reconnect", s->principal,
                 [this, session, delay] {
                   broker.restore(session);
                   BrokerSession* s2 = broker.session(session);
                   reconnect_samples.push_back(
                       ReconnectSample{clock.now_us, s2->principal, delay});
                   auto agent_it = session_agent.find(session);
                   if (agent_it != session_agent.end()) {
                     flush_outbox(agents.at(agent_it->second));
                   }
                 });
  return delay;
}

void World::flush_outbox(AgentRuntime& agent) {
  std::deque<PendingPublish> pending;
  pending.swap(agent.outbox);
  for (PendingPublish& p : pending) {
    client_publish(agent.session, p.topic, std::move(p.bytes));
  }
}

// --- queries -----------------------------------------------------------

AgentRuntime* World::find_agent(const std::string& id) {
  auto it = agents.find(id);
  return it == agents.end() ? nullptr : &it->second;
}

const AgentRuntime* World::find_agent(const std::string& id) const {
  auto it = agents.find(id);
  return it == agents.end() ? nullptr : &it->second;
}

AgentRuntime& World::orchestrator() {
  const AgentSpec* spec = cfg.orchestrator();
  if (!spec) throw SimError("no orchestrator in roster");
  return agents.at(spec->id.id);
}

AgentRuntime& World::bridge() {
  const AgentSpec* spec = cfg.first_with_role(Role::bridge);
  if (!spec) throw SimError("no bridge agent in roster");
  return agents.at(spec->id.id);
}

std::size_t World::actuation_count_for_corr(const std::string& corr) const {
  std::size_t n = 0;
  for (const auto& a : actuations) {
    if (a.corr_id && *a.corr_id == corr) ++n;
  }
  return n;
}

std::size_t World::audit_count_for_corr(const std::string& corr) const {
  std::size_t n = 0;
  for (const auto& m : mirror_log) {
    if (m.decode_ok && m.env.msg_type == MsgType::audit &&
        m.env.correlation_id && m.env.correlation_id->hex == corr) {
      ++n;
    }
  }
  return n;
}

std::optional<Micros> World::audit_visibility_us(const std::string& corr) const {
  std::optional<Micros> best;
  for (const auto& m : mirror_log) {
    if (m.decode_ok && m.env.msg_type == MsgType::audit &&
        m.env.correlation_id && m.env.correlation_id->hex == corr) {
      if (!best || m.receipt_us < *best) best = m.receipt_us;
    }
  }
  return best;
}

const PublishLogEntry* World::find_publish(const std::string& corr,
                                           const std::string& principal) const {
  for (const auto& e : publish_log) {
    if (e.record.publisher_principal == principal && e.record.corr_id &&
        *e.record.corr_id == corr) {
      return &e;
    }
  }
  return nullptr;
}

std::size_t World::operations() const {
  std::size_t n = 0;
  for (const auto& e : publish_log) {
    if (e.record.accepted &&
        !(e.record.msg_type && *e.record.msg_type == MsgType::heartbeat)) {
      ++n;
    }
  }
  return n;
}

std::size_t World::measure_divergence(const std::string& doc) const {
  std::set<std::string> hashes;
  if (cfg.state_mode == StateMode::embedded) {
    for (const auto& [id, agent] : agents) {
      auto it = agent.doc_copies.find(doc);
      if (it != agent.doc_copies.end()) hashes.insert(sha256_hex(it->second));
    }
  } else {
    for (const auto& [id, agent] : agents) {
      auto it = agent.doc_views.find(doc);
      if (it == agent.doc_views.end()) continue;
      auto hash = store.resolve_hash(it->second.ref, it->second.path);
      if (hash) hashes.insert(*hash);
    }
  }
  return hashes.size();
}

}  // namespace swarmsim
